#include "longscribe/transcript.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <sstream>

#include <json.hpp>

namespace longscribe {

namespace {

constexpr std::array<std::string_view, kAcousticTagCount> kTagStrings = {
    "[Unintelligible Speech]", "[Music]",   "[Human Sounds]",
    "[Environmental Sounds]",  "[Noise]",   "[Silence]",
};

bool finite_nonneg(double v) { return std::isfinite(v) && v >= 0.0; }

std::string shortest_double(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, ptr);
}

}  // namespace

std::string_view to_string(AcousticTag tag) {
    return kTagStrings[static_cast<int>(tag)];
}

std::optional<AcousticTag> tag_from_string(std::string_view s) {
    for (int i = 0; i < kAcousticTagCount; ++i) {
        if (kTagStrings[i] == s) return static_cast<AcousticTag>(i);
    }
    return std::nullopt;
}

void validate(const Word& w, std::size_t record) {
    if (w.text.empty()) throw InvariantError("word text is empty", record);
    for (char c : w.text) {
        if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
            throw InvariantError("word text contains whitespace: '" + w.text + "'", record);
        }
    }
    if (w.start && !finite_nonneg(*w.start)) throw InvariantError("word start is not finite and >= 0", record);
    if (w.end && !finite_nonneg(*w.end)) throw InvariantError("word end is not finite and >= 0", record);
    if (w.timed() && *w.start > *w.end) throw InvariantError("word start > end", record);
}

void validate(const Segment& s, std::size_t record) {
    if (s.speaker_id.empty()) throw InvariantError("speaker_id is empty", record);
    if (!finite_nonneg(s.start) || !std::isfinite(s.end)) {
        throw InvariantError("segment times must be finite and >= 0", record);
    }
    if (s.end < s.start) throw InvariantError("segment end < start", record);
    if (s.tag && !s.words.empty()) throw InvariantError("segment has both words and an acoustic tag", record);

    double prev_start = s.start;
    double prev_end = s.start;
    for (const Word& w : s.words) {
        validate(w, record);
        if (w.timed()) {
            if (*w.start < s.start || *w.end > s.end) {
                throw InvariantError("word timing outside its segment", record);
            }
            if (*w.start < prev_start || *w.end < prev_end) {
                throw InvariantError("word timings are not non-decreasing", record);
            }
            prev_start = *w.start;
            prev_end = *w.end;
        }
    }
}

void validate(const Transcript& t) {
    if (t.duration && !finite_nonneg(*t.duration)) {
        throw InvariantError("duration must be finite and >= 0");
    }
    for (std::size_t i = 0; i < t.segments.size(); ++i) {
        validate(t.segments[i], i);
        if (t.duration && t.segments[i].end > *t.duration) {
            throw InvariantError("segment end exceeds recording duration", i);
        }
        if (i > 0 && segment_before(t.segments[i], t.segments[i - 1])) {
            throw InvariantError("segments are not in canonical order", i);
        }
    }
}

bool segment_before(const Segment& a, const Segment& b) {
    if (a.start != b.start) return a.start < b.start;
    if (a.end != b.end) return a.end < b.end;
    return a.speaker_id < b.speaker_id;
}

void canonicalize(Transcript& t) {
    std::stable_sort(t.segments.begin(), t.segments.end(), segment_before);
}

// --- SegLST -----------------------------------------------------------------

namespace {

using json = nlohmann::ordered_json;

double require_number(const json& j, const char* key, std::size_t record) {
    if (!j.contains(key)) throw SchemaError(std::string("missing field '") + key + "'", record);
    if (!j[key].is_number()) throw SchemaError(std::string("field '") + key + "' is not a number", record);
    return j[key].get<double>();
}

}  // namespace

Transcript parse_seglst(std::string_view document) {
    json doc;
    try {
        doc = json::parse(document);
    } catch (const nlohmann::json::parse_error& e) {
        throw SchemaError(std::string("not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw SchemaError("top level is not an object");
    if (!doc.contains("recording_id") || !doc["recording_id"].is_string()) {
        throw SchemaError("missing string field 'recording_id'");
    }
    Transcript t;
    t.recording_id = doc["recording_id"].get<std::string>();
    if (doc.contains("duration") && !doc["duration"].is_null()) {
        if (!doc["duration"].is_number()) throw SchemaError("field 'duration' is not a number");
        t.duration = doc["duration"].get<double>();
    }
    if (!doc.contains("segments") || !doc["segments"].is_array()) {
        throw SchemaError("missing array field 'segments'");
    }

    std::size_t index = 0;
    for (const json& rec : doc["segments"]) {
        if (!rec.is_object()) throw SchemaError("segment record is not an object", index);
        Segment s;
        if (!rec.contains("speaker") || !rec["speaker"].is_string()) {
            throw SchemaError("missing string field 'speaker'", index);
        }
        s.speaker_id = rec["speaker"].get<std::string>();
        s.start = require_number(rec, "start", index);
        s.end = require_number(rec, "end", index);

        if (rec.contains("words") && !rec["words"].is_null()) {
            if (!rec["words"].is_array()) throw SchemaError("field 'words' is not an array", index);
            for (const json& w : rec["words"]) {
                if (!w.is_string()) throw SchemaError("word entry is not a string", index);
                s.words.push_back(Word{w.get<std::string>(), std::nullopt, std::nullopt});
            }
        }
        if (rec.contains("word_timings") && !rec["word_timings"].is_null()) {
            const json& wt = rec["word_timings"];
            if (!wt.is_array()) throw SchemaError("field 'word_timings' is not an array", index);
            if (wt.size() != s.words.size()) {
                throw SchemaError("word_timings length does not match words length", index);
            }
            for (std::size_t i = 0; i < wt.size(); ++i) {
                if (wt[i].is_null()) continue;
                if (!wt[i].is_array() || wt[i].size() != 2 || !wt[i][0].is_number() || !wt[i][1].is_number()) {
                    throw SchemaError("word_timings entry is not [start, end]", index);
                }
                s.words[i].start = wt[i][0].get<double>();
                s.words[i].end = wt[i][1].get<double>();
            }
        }
        if (rec.contains("tag") && !rec["tag"].is_null()) {
            if (!rec["tag"].is_string()) throw SchemaError("field 'tag' is not a string", index);
            auto tag = tag_from_string(rec["tag"].get<std::string>());
            if (!tag) throw SchemaError("unknown acoustic tag '" + rec["tag"].get<std::string>() + "'", index);
            s.tag = *tag;
        }
        validate(s, index);
        t.segments.push_back(std::move(s));
        ++index;
    }
    canonicalize(t);
    if (t.duration) {
        for (std::size_t i = 0; i < t.segments.size(); ++i) {
            if (t.segments[i].end > *t.duration) {
                throw InvariantError("segment end exceeds recording duration", i);
            }
        }
    }
    return t;
}

std::string serialize_seglst(const Transcript& t) {
    json doc;
    doc["recording_id"] = t.recording_id;
    doc["duration"] = t.duration ? json(*t.duration) : json(nullptr);
    doc["segments"] = json::array();
    for (const Segment& s : t.segments) {
        json rec;
        rec["speaker"] = s.speaker_id;
        rec["start"] = s.start;
        rec["end"] = s.end;
        rec["words"] = json::array();
        for (const Word& w : s.words) rec["words"].push_back(w.text);
        bool any_timing = std::any_of(s.words.begin(), s.words.end(), [](const Word& w) { return w.timed(); });
        if (any_timing) {
            json wt = json::array();
            for (const Word& w : s.words) {
                if (w.timed()) {
                    wt.push_back(json::array({*w.start, *w.end}));
                } else {
                    wt.push_back(nullptr);
                }
            }
            rec["word_timings"] = std::move(wt);
        } else {
            rec["word_timings"] = nullptr;
        }
        rec["tag"] = s.tag ? json(std::string(to_string(*s.tag))) : json(nullptr);
        doc["segments"].push_back(std::move(rec));
    }
    return doc.dump(2) + "\n";
}

// --- Rich stream ------------------------------------------------------------

std::string format_timestamp(double seconds, TimeFormat fmt) {
    long long cs = std::llround(seconds * 100.0);
    long long hh = cs / 360000;
    long long rem = cs % 360000;
    long long mm = rem / 6000;
    long long ss = (rem % 6000) / 100;
    long long cc = rem % 100;
    char buf[32];
    if (fmt == TimeFormat::Hours || hh > 0) {
        std::snprintf(buf, sizeof(buf), "%02lld:%02lld:%02lld.%02lld", hh, mm, ss, cc);
    } else {
        std::snprintf(buf, sizeof(buf), "%02lld:%02lld.%02lld", mm, ss, cc);
    }
    return buf;
}

std::string render_rich_stream(const Transcript& t, TimeFormat fmt) {
    std::ostringstream out;
    if (!t.recording_id.empty()) out << "# recording_id: " << t.recording_id << "\n";
    if (t.duration) out << "# duration: " << shortest_double(*t.duration) << "\n";
    for (const Segment& s : t.segments) {
        if (s.speaker_id.find(']') != std::string::npos) {
            throw InvariantError("speaker_id contains ']', not renderable: '" + s.speaker_id + "'");
        }
        out << '[' << s.speaker_id << "] [" << format_timestamp(s.start, fmt) << " - "
            << format_timestamp(s.end, fmt) << "] ";
        if (s.tag) {
            out << to_string(*s.tag);
        } else {
            for (std::size_t i = 0; i < s.words.size(); ++i) {
                if (i) out << ' ';
                out << s.words[i].text;
            }
        }
        out << '\n';
    }
    return out.str();
}

namespace {

struct LineCursor {
    std::string_view line;
    std::size_t line_no;
    std::size_t pos = 0;

    [[noreturn]] void fail(const std::string& msg) const { throw GrammarError(msg, line_no, pos + 1); }

    char peek() const { return pos < line.size() ? line[pos] : '\0'; }
    bool done() const { return pos >= line.size(); }

    void expect(char c, const char* what) {
        if (peek() != c) fail(std::string("expected ") + what);
        ++pos;
    }
};

// mm:ss.cc or hh:mm:ss.cc, centisecond precision. Returns seconds.
double parse_timestamp(LineCursor& cur) {
    auto two_digits = [&](const char* what) -> long long {
        if (!std::isdigit(static_cast<unsigned char>(cur.peek()))) cur.fail(std::string("expected ") + what);
        long long v = 0;
        std::size_t digits = 0;
        while (std::isdigit(static_cast<unsigned char>(cur.peek())) && digits < 2) {
            v = v * 10 + (cur.line[cur.pos] - '0');
            ++cur.pos;
            ++digits;
        }
        if (digits != 2) cur.fail(std::string("expected two digits for ") + what);
        return v;
    };

    long long a = two_digits("minutes");
    cur.expect(':', "':' in timestamp");
    long long b = two_digits("seconds");
    long long hh = 0, mm = 0;
    if (cur.peek() == ':') {
        ++cur.pos;
        hh = a;
        mm = b;
        b = two_digits("seconds");
    } else {
        mm = a;
    }
    cur.expect('.', "'.' before centiseconds");
    long long cc = two_digits("centiseconds");
    if (mm > 59) cur.fail("minutes field exceeds 59");
    if (b > 59) cur.fail("seconds field exceeds 59");
    long long total_cs = ((hh * 60 + mm) * 60 + b) * 100 + cc;
    return static_cast<double>(total_cs) / 100.0;
}

std::vector<std::string> split_words(std::string_view content) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < content.size()) {
        while (i < content.size() && content[i] == ' ') ++i;
        std::size_t j = i;
        while (j < content.size() && content[j] != ' ') ++j;
        if (j > i) out.emplace_back(content.substr(i, j - i));
        i = j;
    }
    return out;
}

bool parse_metadata(std::string_view line, Transcript& t) {
    auto strip = [](std::string_view v) {
        while (!v.empty() && v.front() == ' ') v.remove_prefix(1);
        while (!v.empty() && (v.back() == ' ' || v.back() == '\r')) v.remove_suffix(1);
        return v;
    };
    constexpr std::string_view kId = "# recording_id:";
    constexpr std::string_view kDur = "# duration:";
    if (line.substr(0, kId.size()) == kId) {
        t.recording_id = std::string(strip(line.substr(kId.size())));
        return true;
    }
    if (line.substr(0, kDur.size()) == kDur) {
        std::string_view v = strip(line.substr(kDur.size()));
        double d = 0;
        auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), d);
        if (ec != std::errc() || ptr != v.data() + v.size()) return false;
        t.duration = d;
        return true;
    }
    return true;  // other '#' lines are comments
}

}  // namespace

Transcript parse_rich_stream(std::string_view text) {
    Transcript t;
    std::size_t line_no = 0;
    std::size_t begin = 0;
    while (begin <= text.size()) {
        std::size_t nl = text.find('\n', begin);
        std::string_view line = text.substr(begin, nl == std::string_view::npos ? text.size() - begin : nl - begin);
        begin = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty() || line.find_first_not_of(' ') == std::string_view::npos) continue;
        if (line.front() == '#') {
            parse_metadata(line, t);
            continue;
        }

        LineCursor cur{line, line_no};
        cur.expect('[', "'[' before speaker id");
        std::size_t close = line.find(']', cur.pos);
        if (close == std::string_view::npos) cur.fail("unterminated speaker id");
        std::string speaker(line.substr(cur.pos, close - cur.pos));
        if (speaker.empty()) cur.fail("empty speaker id");
        cur.pos = close + 1;
        cur.expect(' ', "' ' after speaker id");
        cur.expect('[', "'[' before time range");
        double start = parse_timestamp(cur);
        cur.expect(' ', "' - ' between timestamps");
        cur.expect('-', "' - ' between timestamps");
        cur.expect(' ', "' - ' between timestamps");
        std::size_t end_col = cur.pos;
        double end = parse_timestamp(cur);
        cur.expect(']', "']' after time range");
        cur.expect(' ', "' ' before content");
        if (end < start) throw GrammarError("segment end before start", line_no, end_col + 1);

        std::string_view content = line.substr(cur.pos);
        while (!content.empty() && content.back() == ' ') content.remove_suffix(1);
        if (content.empty()) cur.fail("empty content");

        Segment s;
        s.speaker_id = std::move(speaker);
        s.start = start;
        s.end = end;
        if (content.front() == '[') {
            auto tag = tag_from_string(content);
            if (!tag) throw GrammarError("unknown acoustic tag '" + std::string(content) + "'", line_no, cur.pos + 1);
            s.tag = *tag;
        } else {
            for (auto& w : split_words(content)) s.words.push_back(Word{std::move(w), std::nullopt, std::nullopt});
        }
        t.segments.push_back(std::move(s));
    }
    canonicalize(t);
    validate(t);
    return t;
}

// --- Pseudo word timings ----------------------------------------------------

Segment estimate_word_timings(const Segment& s, TimingStrategy strategy) {
    if (s.words.empty()) throw EmptySegment("segment has no words to time");
    for (const Word& w : s.words) {
        if (w.start || w.end) throw BadParams("segment already carries word timings");
    }
    Segment out = s;
    const std::size_t n = s.words.size();
    const double span = s.end - s.start;

    // boundary[i] for i in [0, n]; exact segment bounds at the ends.
    std::vector<double> boundary(n + 1);
    boundary[0] = s.start;
    boundary[n] = s.end;
    if (strategy == TimingStrategy::Equidistant) {
        for (std::size_t i = 1; i < n; ++i) {
            boundary[i] = s.start + span * (static_cast<double>(i) / static_cast<double>(n));
        }
    } else {
        std::size_t total_chars = 0;
        for (const Word& w : s.words) total_chars += w.text.size();
        std::size_t cum = 0;
        for (std::size_t i = 1; i < n; ++i) {
            cum += s.words[i - 1].text.size();
            boundary[i] = s.start + span * (static_cast<double>(cum) / static_cast<double>(total_chars));
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        out.words[i].start = boundary[i];
        out.words[i].end = boundary[i + 1];
    }
    return out;
}

}  // namespace longscribe
