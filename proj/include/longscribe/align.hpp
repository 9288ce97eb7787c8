#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "longscribe/errors.hpp"

namespace longscribe {

struct EditSummary {
    std::int64_t substitutions = 0;
    std::int64_t insertions = 0;
    std::int64_t deletions = 0;
    std::int64_t matches = 0;
    std::int64_t ref_len = 0;  // matches + substitutions + deletions

    std::int64_t edit_cost() const { return substitutions + insertions + deletions; }
    bool operator==(const EditSummary&) const = default;
};

struct TimedWord {
    std::string text;
    double start = 0.0;  // seconds
    double end = 0.0;    // seconds
};

// Unit-cost edit distance (sub = ins = del = 1, match = 0). Among co-optimal
// alignments the backtrack prefers match > substitution > deletion >
// insertion, so the summary is deterministic.
EditSummary levenshtein_align(std::span<const std::string> ref, std::span<const std::string> hyp);

enum class DpMode {
    Banded,         // evaluates only a corridor around admissible pairings
    FullReference,  // evaluates the whole matrix; serial reference for tests
};

// Edit distance where pairing ref word r with hyp word h (as match or
// substitution) is admissible only when
//   h.start <= r.end + collar  and  h.end >= r.start - collar.
// Both inputs must be sorted by start (UnsortedInput otherwise). The banded
// mode skips cells that cannot lie on an optimal path; its result is
// bit-identical to the full DP, which is kept as the reference.
EditSummary time_constrained_align(std::span<const TimedWord> ref, std::span<const TimedWord> hyp,
                                   double collar, DpMode mode = DpMode::Banded);

struct CostMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<std::int64_t> cost;  // row-major, all entries >= 0

    std::int64_t at(std::size_t r, std::size_t c) const { return cost[r * cols + c]; }
    std::int64_t& at(std::size_t r, std::size_t c) { return cost[r * cols + c]; }

    static CostMatrix zeros(std::size_t rows, std::size_t cols) {
        return CostMatrix{rows, cols, std::vector<std::int64_t>(rows * cols, 0)};
    }
};

struct Assignment {
    // mapping[r] = matched column of row r, or nullopt when the row is
    // unmatched. Injective over the matched columns.
    std::vector<std::optional<std::size_t>> mapping;
    std::int64_t total_cost = 0;

    std::size_t matched_count() const {
        std::size_t k = 0;
        for (const auto& m : mapping) k += m.has_value();
        return k;
    }
};

// Minimizes sum(matched cost) + sum(unmatched row/col penalties) over all
// partial injective row->col mappings. Optimal for rectangular matrices.
// Among co-optimal solutions, returns the lexicographically smallest mapping
// vector, with "unmatched" ordered after every real column.
Assignment solve_assignment(const CostMatrix& c, std::span<const std::int64_t> unmatched_row_cost,
                            std::span<const std::int64_t> unmatched_col_cost);

namespace detail {

// Monotone staircase corridor around the admissible region of the
// time-constrained DP. Rows are DP rows 0..n, bounds are DP columns. The
// corridor contains (0,0), (n,m), every admissible cell and its diagonal
// predecessor, lo/hi are non-decreasing, and lo[i+1] <= hi[i]; any path into
// a corridor cell can then be rerouted through the corridor at equal cost,
// so corridor cell values equal the full-DP values.
struct Corridor {
    std::vector<std::int64_t> lo;
    std::vector<std::int64_t> hi;
};

Corridor build_corridor(std::span<const TimedWord> ref, std::span<const TimedWord> hyp, double collar);

}  // namespace detail

}  // namespace longscribe
