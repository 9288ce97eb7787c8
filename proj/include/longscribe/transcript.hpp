#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "longscribe/errors.hpp"

namespace longscribe {

// Closed set of non-speech events. Serialized forms are bit-exact and are
// the only bracketed contents the rich stream accepts.
enum class AcousticTag {
    UnintelligibleSpeech,
    Music,
    HumanSounds,
    EnvironmentalSounds,
    Noise,
    Silence,
};

inline constexpr int kAcousticTagCount = 6;

std::string_view to_string(AcousticTag tag);  // e.g. "[Human Sounds]"
std::optional<AcousticTag> tag_from_string(std::string_view s);

struct Interval {
    double start = 0.0;  // seconds
    double end = 0.0;    // seconds
    double length() const { return end - start; }
    bool operator==(const Interval&) const = default;
};

struct Word {
    std::string text;  // non-empty, no internal whitespace
    std::optional<double> start;  // seconds
    std::optional<double> end;    // seconds

    bool timed() const { return start.has_value() && end.has_value(); }
    bool operator==(const Word&) const = default;
};

// One speaker turn. Either it carries words or it carries an acoustic tag,
// never both; a segment with neither is a bare turn (as produced by
// diarization) and is allowed.
struct Segment {
    std::string speaker_id;
    double start = 0.0;  // seconds
    double end = 0.0;    // seconds
    std::vector<Word> words;
    std::optional<AcousticTag> tag;

    bool has_words() const { return !words.empty(); }
    bool operator==(const Segment&) const = default;
};

struct Transcript {
    std::string recording_id;
    std::optional<double> duration;  // seconds
    std::vector<Segment> segments;   // canonical order: (start, end, speaker_id)

    bool operator==(const Transcript&) const = default;
};

// Throws InvariantError when a domain invariant is violated. The record
// index, when given, is attached to the error.
void validate(const Word& w, std::size_t record = kNoRecord);
void validate(const Segment& s, std::size_t record = kNoRecord);
void validate(const Transcript& t);

// Stable-sorts segments into the canonical (start, end, speaker_id) order.
void canonicalize(Transcript& t);

bool segment_before(const Segment& a, const Segment& b);

// ---------------------------------------------------------------------------
// SegLST interchange format (JSON):
//   {"recording_id": str, "duration": number|null,
//    "segments": [{"speaker": str, "start": n, "end": n,
//                  "words": [str]|null, "word_timings": [[n,n]|null]|null,
//                  "tag": str|null}]}
// Times are decimal seconds; unknown keys are ignored.

Transcript parse_seglst(std::string_view document);
std::string serialize_seglst(const Transcript& t);

// ---------------------------------------------------------------------------
// Rich transcription stream. One line per segment:
//   [<speaker_id>] [<mm:ss.cc> - <mm:ss.cc>] <content>
// Content is the space-joined word sequence or one bracketed acoustic tag.
// Timestamps carry centisecond precision and grow an hours field at 60 min
// (hh:mm:ss.cc). Lines starting with '#' are metadata or comments; the
// recognized keys are "# recording_id: <id>" and "# duration: <seconds>",
// which make the conversion to and from SegLST lossless at segment level
// (per-word timings do not survive the rich stream).

enum class TimeFormat {
    Compact,  // mm:ss.cc below one hour, hh:mm:ss.cc from there on
    Hours,    // always hh:mm:ss.cc
};

std::string render_rich_stream(const Transcript& t, TimeFormat fmt = TimeFormat::Compact);
Transcript parse_rich_stream(std::string_view text);

std::string format_timestamp(double seconds, TimeFormat fmt = TimeFormat::Compact);

// ---------------------------------------------------------------------------
// Pseudo word timings for segments that only carry segment bounds.

enum class TimingStrategy {
    Equidistant,       // equal sub-intervals
    CharProportional,  // sub-interval widths proportional to word lengths
};

// Splits [s.start, s.end] over the words of s. The first word starts exactly
// at s.start and the last ends exactly at s.end. Throws EmptySegment when s
// has no words, BadParams when any word is already timed.
Segment estimate_word_timings(const Segment& s, TimingStrategy strategy);

}  // namespace longscribe
