#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "longscribe/align.hpp"
#include "longscribe/transcript.hpp"

namespace longscribe {

// Exact rational rate: integer error mass over an integer denominator.
// den == 0 with num == 0 reads as a perfect empty comparison (rate 0);
// den == 0 with num > 0 is the undefined sentinel, rendered "undefined".
struct Ratio {
    std::int64_t num = 0;
    std::int64_t den = 0;

    bool defined() const { return den > 0 || num == 0; }
    double value() const;
    double percent() const { return value() * 100.0; }
    bool operator==(const Ratio&) const = default;
};

struct WerBreakdown {
    EditSummary summary;
    Ratio rate() const { return Ratio{summary.edit_cost(), summary.ref_len}; }
    bool operator==(const WerBreakdown&) const = default;
};

// DER components in integer microseconds. The integer timeline keeps every
// derived quantity exact, so speaker relabelings cannot shift the result by
// rounding.
struct DerBreakdown {
    std::int64_t missed_us = 0;
    std::int64_t false_alarm_us = 0;
    std::int64_t confusion_us = 0;
    std::int64_t ref_speech_us = 0;

    double missed() const { return static_cast<double>(missed_us) / 1e6; }
    double false_alarm() const { return static_cast<double>(false_alarm_us) / 1e6; }
    double confusion() const { return static_cast<double>(confusion_us) / 1e6; }
    double ref_speech() const { return static_cast<double>(ref_speech_us) / 1e6; }
    std::int64_t error_us() const { return missed_us + false_alarm_us + confusion_us; }
    Ratio rate() const { return Ratio{error_us(), ref_speech_us}; }
    bool operator==(const DerBreakdown&) const = default;
};

// ref speaker -> hyp speaker pairs, sorted by ref label. Partial injective.
struct SpeakerMapping {
    std::vector<std::pair<std::string, std::string>> pairs;
    bool operator==(const SpeakerMapping&) const = default;
};

struct PermutedWer {
    SpeakerMapping mapping;
    WerBreakdown breakdown;
};

struct EvalConfig {
    double collar_tcp = 5.0;   // seconds
    double collar_der = 0.25;  // seconds
    bool normalize = false;    // lowercase + strip punctuation before scoring
    TimingStrategy timing = TimingStrategy::Equidistant;
    bool interpolate = true;   // derive word timings from segment bounds
    DpMode dp_mode = DpMode::Banded;
    int jobs = 0;              // 0 = all cores, 1 = serial; never changes results
};

// Lowercases ASCII letters and removes ASCII punctuation; words that become
// empty are dropped from the stream.
std::string normalize_token(std::string_view token);
std::vector<std::string> normalize_stream(std::span<const std::string> tokens);

// Words of all word-bearing segments in canonical order, speakers ignored.
std::vector<std::string> word_stream(const Transcript& t, bool normalize);

// WER over the full transcripts; speaker labels and timings ignored.
WerBreakdown wer(const Transcript& ref, const Transcript& hyp, bool normalize = false);

// WER over per-speaker concatenated streams under the error-minimizing
// injective speaker mapping. Unmatched speakers cost their stream length.
PermutedWer cpwer(const Transcript& ref, const Transcript& hyp, const EvalConfig& cfg = {});

// cpWER with the time-constrained aligner; word timings are taken from the
// input or derived per cfg.timing when absent.
PermutedWer tcpwer(const Transcript& ref, const Transcript& hyp, double collar = 5.0,
                   const EvalConfig& cfg = {});

// Diarization error rate. Word content is ignored; tag-only segments are
// non-speech. Error mass is accumulated outside +/- collar around every
// reference boundary; the denominator is total reference speaker time.
DerBreakdown der(const Transcript& ref, const Transcript& hyp, double collar = 0.25);

struct RecordingRow {
    std::string recording_id;
    DerBreakdown der;
    PermutedWer cpwer;
    PermutedWer tcpwer;
    WerBreakdown wer;
};

struct ReportIssue {
    std::string recording_id;
    std::string message;
};

struct MetricReport {
    std::vector<RecordingRow> rows;     // sorted by recording_id
    std::vector<ReportIssue> issues;    // missing pairs, per-recording failures

    // Micro-averages: total error mass over total denominator mass.
    Ratio corpus_der() const;
    Ratio corpus_cpwer() const;
    Ratio corpus_tcpwer() const;
    Ratio corpus_wer() const;
};

// Evaluates all four metrics per recording, matching refs and hyps by
// recording_id. Unmatched recordings become issues, not failures. Recordings
// are processed in parallel per cfg.jobs; the report is order-deterministic.
MetricReport evaluate_corpus(std::span<const Transcript> refs, std::span<const Transcript> hyps,
                             const EvalConfig& cfg = {});

// Report rendering (see report.cpp). Headers echo the effective config plus
// any caller-supplied key/value extras (the CLI adds its invocation there).
std::string render_report_table(const MetricReport& report, const EvalConfig& cfg,
                                std::span<const std::pair<std::string, std::string>> extras = {});
std::string render_report_json(const MetricReport& report, const EvalConfig& cfg,
                               std::span<const std::pair<std::string, std::string>> extras = {});

std::string_view to_string(TimingStrategy s);
std::string_view to_string(DpMode m);

namespace detail {

// Per-speaker timed streams as used by tcpwer, after timing materialization,
// normalization and the stable sort by start. Exposed for tests.
struct SpeakerStreams {
    std::vector<std::string> speakers;               // sorted labels
    std::vector<std::vector<TimedWord>> streams;     // parallel to speakers
};
SpeakerStreams timed_speaker_streams(const Transcript& t, const EvalConfig& cfg);
SpeakerStreams plain_speaker_streams(const Transcript& t, bool normalize);

}  // namespace detail

}  // namespace longscribe
