#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "longscribe/transcript.hpp"

namespace longscribe {

struct QualityReport {
    std::string recording_id;
    std::vector<double> segment_wers;  // per segment; +inf when undefined
    double bad_fraction = 0.0;         // share of segments with WER > 0.20
    double speech_fraction = 0.0;      // speech seconds / total seconds
    bool keep = true;
};

// Sampling weights for {benchmarks, music, synthetic, longform}.
struct MixWeights {
    double benchmarks = 0.5;
    double music = 0.1;
    double synthetic = 0.1;
    double longform = 0.3;

    // Throws BadParams unless non-negative and summing to 1 (1e-9 slack).
    void validate() const;
    double weight(int source) const;
};

// Splits each segment after every word whose text ends with one of the
// punctuation characters, at that word's end timestamp. Pieces still longer
// than max_len are split into ceil(len / max_len) parts at the word-end
// timestamps nearest the equal-part targets. Splits only happen at word
// boundaries whose timings do not overlap, so every piece keeps valid
// timings; word content and total speech time are preserved.
Transcript refine_boundaries(const Transcript& t, std::string_view punctuation = ".?!",
                             double max_len = 30.0);

// Per-segment WER against the re-transcription; a segment is bad when its
// WER strictly exceeds 0.20, the recording is discarded when more than 30%
// of segments are bad or speech covers less than 60% of the duration.
// Boundary cases stay kept; the comparisons run on exact integers.
QualityReport quality_filter(std::span<const std::pair<std::vector<std::string>, std::vector<std::string>>> segments,
                             double speech_seconds, double total_seconds, bool normalize = true,
                             std::string recording_id = {});

// Consecutive fixed-size chunks covering [0, duration] without gaps or
// overlaps; the last chunk may be short.
std::vector<Interval> chunk_intervals(double duration, double chunk = 240.0);

// Moves a chunk-local transcript back to global time.
Transcript shift_transcript(const Transcript& t, double offset);

// ceil(duration * rate); one hour at the default rate is 27000 tokens.
std::uint64_t token_budget(double duration_s, double tokens_per_second = 7.5);

// Doubling curriculum 8192, 16384, 32768, 65536 for stages 0..3.
std::uint64_t curriculum_length(int stage);

// n source indices drawn from the weights. Deterministic for a given seed:
// std::mt19937_64 seeded directly, each draw mapped to [0, 1) by the upper
// 53 bits (u = (x >> 11) * 2^-53), then located in the cumulative weights.
std::vector<int> mix_sample(const MixWeights& w, std::uint64_t seed, std::size_t n);

}  // namespace longscribe
