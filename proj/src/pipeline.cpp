#include "longscribe/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "longscribe/align.hpp"
#include "longscribe/metrics.hpp"

namespace longscribe {

void MixWeights::validate() const {
    const double ws[] = {benchmarks, music, synthetic, longform};
    double sum = 0.0;
    for (double w : ws) {
        if (!(w >= 0.0)) throw BadParams("mix weights must be non-negative");
        sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw BadParams("mix weights must sum to 1");
}

double MixWeights::weight(int source) const {
    switch (source) {
        case 0: return benchmarks;
        case 1: return music;
        case 2: return synthetic;
        default: return longform;
    }
}

// --- Boundary refinement ---------------------------------------------------

namespace {

// A cut between word i and i+1 is usable when both timings exist and do not
// overlap, so the cut timestamp is a clean boundary for both pieces.
bool cut_ok(const Segment& s, std::size_t i) {
    const Word& a = s.words[i];
    const Word& b = s.words[i + 1];
    return a.timed() && b.timed() && *a.end <= *b.start;
}

Segment make_piece(const Segment& src, std::size_t first, std::size_t last, double start, double end) {
    Segment piece;
    piece.speaker_id = src.speaker_id;
    piece.start = start;
    piece.end = end;
    piece.words.assign(src.words.begin() + static_cast<std::ptrdiff_t>(first),
                       src.words.begin() + static_cast<std::ptrdiff_t>(last) + 1);
    return piece;
}

void split_long_piece(const Segment& piece, double max_len, std::vector<Segment>& out) {
    const double len = piece.end - piece.start;
    if (!(len > max_len) || piece.words.size() < 2) {
        out.push_back(piece);
        return;
    }
    const auto parts = static_cast<std::size_t>(std::ceil(len / max_len));
    // Snap each equal-part target to the nearest usable word end.
    std::vector<std::size_t> cut_after;
    for (std::size_t p = 1; p < parts; ++p) {
        const double target = piece.start + len * (static_cast<double>(p) / static_cast<double>(parts));
        double best_delta = std::numeric_limits<double>::infinity();
        std::size_t best = piece.words.size();
        for (std::size_t i = 0; i + 1 < piece.words.size(); ++i) {
            if (!cut_ok(piece, i)) continue;
            const double delta = std::abs(*piece.words[i].end - target);
            if (delta < best_delta) {
                best_delta = delta;
                best = i;
            }
        }
        if (best == piece.words.size()) continue;
        if (cut_after.empty() || cut_after.back() < best) cut_after.push_back(best);
    }
    if (cut_after.empty()) {
        out.push_back(piece);
        return;
    }
    std::size_t first = 0;
    double start = piece.start;
    for (std::size_t cut : cut_after) {
        const double end = *piece.words[cut].end;
        out.push_back(make_piece(piece, first, cut, start, end));
        first = cut + 1;
        start = end;
    }
    out.push_back(make_piece(piece, first, piece.words.size() - 1, start, piece.end));
}

}  // namespace

Transcript refine_boundaries(const Transcript& t, std::string_view punctuation, double max_len) {
    Transcript out;
    out.recording_id = t.recording_id;
    out.duration = t.duration;
    for (const Segment& s : t.segments) {
        if (s.tag || s.words.empty()) {
            out.segments.push_back(s);
            continue;
        }
        for (const Word& w : s.words) {
            if (!w.timed()) {
                throw MissingTimings("refine_boundaries requires word timings on segment words");
            }
        }
        // Punctuation pass first, then the length rule on every piece.
        std::vector<Segment> pieces;
        std::size_t first = 0;
        double start = s.start;
        for (std::size_t i = 0; i + 1 < s.words.size(); ++i) {
            const char last_char = s.words[i].text.back();
            if (punctuation.find(last_char) == std::string_view::npos) continue;
            if (!cut_ok(s, i)) continue;
            const double end = *s.words[i].end;
            pieces.push_back(make_piece(s, first, i, start, end));
            first = i + 1;
            start = end;
        }
        pieces.push_back(make_piece(s, first, s.words.size() - 1, start, s.end));
        for (const Segment& piece : pieces) split_long_piece(piece, max_len, out.segments);
    }
    canonicalize(out);
    validate(out);
    return out;
}

// --- Quality filter ----------------------------------------------------------

QualityReport quality_filter(std::span<const std::pair<std::vector<std::string>, std::vector<std::string>>> segments,
                             double speech_seconds, double total_seconds, bool normalize,
                             std::string recording_id) {
    if (segments.empty()) throw EmptyCorpus("no segments to filter");
    if (!(total_seconds > 0.0)) throw EmptyCorpus("total duration must be positive");

    QualityReport report;
    report.recording_id = std::move(recording_id);
    std::int64_t bad = 0;
    for (const auto& [ref, hyp] : segments) {
        const auto r = normalize ? normalize_stream(ref) : ref;
        const auto h = normalize ? normalize_stream(hyp) : hyp;
        const EditSummary s = levenshtein_align(r, h);
        double rate;
        if (s.ref_len > 0) {
            rate = static_cast<double>(s.edit_cost()) / static_cast<double>(s.ref_len);
            // bad iff WER strictly exceeds 20%: 5 * errors > ref_len, exactly.
            if (5 * s.edit_cost() > s.ref_len) ++bad;
        } else if (s.edit_cost() == 0) {
            rate = 0.0;
        } else {
            rate = std::numeric_limits<double>::infinity();
            ++bad;
        }
        report.segment_wers.push_back(rate);
    }
    const auto n = static_cast<std::int64_t>(segments.size());
    report.bad_fraction = static_cast<double>(bad) / static_cast<double>(n);
    report.speech_fraction = speech_seconds / total_seconds;
    const bool too_many_bad = 10 * bad > 3 * n;                        // bad_fraction > 0.30
    const bool too_little_speech = 10.0 * speech_seconds < 6.0 * total_seconds;  // speech < 0.60
    report.keep = !(too_many_bad || too_little_speech);
    return report;
}

// --- Chunking ------------------------------------------------------------------

std::vector<Interval> chunk_intervals(double duration, double chunk) {
    if (!(chunk > 0.0) || duration < 0.0) throw BadParams("chunk_intervals requires chunk > 0, duration >= 0");
    std::vector<Interval> out;
    for (std::size_t i = 0;; ++i) {
        const double start = static_cast<double>(i) * chunk;
        if (start >= duration) break;
        out.push_back({start, std::min(start + chunk, duration)});
    }
    return out;
}

Transcript shift_transcript(const Transcript& t, double offset) {
    Transcript out = t;
    if (out.duration) *out.duration += offset;
    for (Segment& s : out.segments) {
        s.start += offset;
        s.end += offset;
        for (Word& w : s.words) {
            if (w.start) *w.start += offset;
            if (w.end) *w.end += offset;
        }
    }
    canonicalize(out);
    return out;
}

// --- Token arithmetic ------------------------------------------------------------

std::uint64_t token_budget(double duration_s, double tokens_per_second) {
    if (duration_s < 0.0 || tokens_per_second < 0.0) throw BadParams("token_budget requires non-negative inputs");
    return static_cast<std::uint64_t>(std::ceil(duration_s * tokens_per_second));
}

std::uint64_t curriculum_length(int stage) {
    switch (stage) {
        case 0: return 8192;
        case 1: return 16384;
        case 2: return 32768;
        case 3: return 65536;
        default: throw BadStage("curriculum stage must be in {0, 1, 2, 3}");
    }
}

// --- Mix sampling ---------------------------------------------------------------

std::vector<int> mix_sample(const MixWeights& w, std::uint64_t seed, std::size_t n) {
    w.validate();
    std::mt19937_64 eng(seed);
    const double c0 = w.benchmarks;
    const double c1 = c0 + w.music;
    const double c2 = c1 + w.synthetic;
    std::vector<int> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double u = static_cast<double>(eng() >> 11) * 0x1.0p-53;
        out.push_back(u < c0 ? 0 : u < c1 ? 1 : u < c2 ? 2 : 3);
    }
    return out;
}

}  // namespace longscribe
