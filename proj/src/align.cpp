#include "longscribe/align.hpp"

#include <algorithm>
#include <cassert>
#include <cstdint>
#include <limits>
#include <unordered_map>

namespace longscribe {

namespace {

constexpr std::int32_t kInf32 = std::numeric_limits<std::int32_t>::max() / 2;
constexpr std::int64_t kInf64 = std::numeric_limits<std::int64_t>::max() / 4;

std::vector<std::int32_t> intern(std::span<const std::string> words,
                                 std::unordered_map<std::string_view, std::int32_t>& table) {
    std::vector<std::int32_t> ids;
    ids.reserve(words.size());
    for (const auto& w : words) {
        auto [it, _] = table.try_emplace(w, static_cast<std::int32_t>(table.size()));
        ids.push_back(it->second);
    }
    return ids;
}

}  // namespace

EditSummary levenshtein_align(std::span<const std::string> ref, std::span<const std::string> hyp) {
    std::unordered_map<std::string_view, std::int32_t> table;
    const auto r = intern(ref, table);
    const auto h = intern(hyp, table);
    const std::size_t n = r.size();
    const std::size_t m = h.size();

    // Direction codes: 1 match, 2 substitution, 3 deletion (up), 4 insertion
    // (left). Ties resolved at fill time in that order, which is what the
    // backtrack preference match > sub > del > ins amounts to.
    std::vector<std::uint8_t> dir((n + 1) * (m + 1), 0);
    std::vector<std::int32_t> prev(m + 1), curr(m + 1);
    for (std::size_t j = 0; j <= m; ++j) {
        prev[j] = static_cast<std::int32_t>(j);
        dir[j] = 4;
    }
    dir[0] = 0;
    for (std::size_t i = 1; i <= n; ++i) {
        curr[0] = static_cast<std::int32_t>(i);
        dir[i * (m + 1)] = 3;
        const std::int32_t ri = r[i - 1];
        for (std::size_t j = 1; j <= m; ++j) {
            const bool eq = ri == h[j - 1];
            std::int32_t best = prev[j - 1] + (eq ? 0 : 1);
            std::uint8_t d = eq ? 1 : 2;
            if (prev[j] + 1 < best) {
                best = prev[j] + 1;
                d = 3;
            }
            if (curr[j - 1] + 1 < best) {
                best = curr[j - 1] + 1;
                d = 4;
            }
            curr[j] = best;
            dir[i * (m + 1) + j] = d;
        }
        std::swap(prev, curr);
    }

    EditSummary s;
    s.ref_len = static_cast<std::int64_t>(n);
    std::size_t i = n, j = m;
    while (i > 0 || j > 0) {
        switch (dir[i * (m + 1) + j]) {
            case 1: ++s.matches; --i; --j; break;
            case 2: ++s.substitutions; --i; --j; break;
            case 3: ++s.deletions; --i; break;
            default: ++s.insertions; --j; break;
        }
    }
    return s;
}

// --- Time-constrained alignment ----------------------------------------------

namespace detail {

Corridor build_corridor(std::span<const TimedWord> ref, std::span<const TimedWord> hyp, double collar) {
    const std::int64_t n = static_cast<std::int64_t>(ref.size());
    const std::int64_t m = static_cast<std::int64_t>(hyp.size());

    // Prefix maximum of hyp ends; pm[j] covers hyp[0..j-1].
    std::vector<double> pm(m + 1, -std::numeric_limits<double>::infinity());
    for (std::int64_t j = 1; j <= m; ++j) pm[j] = std::max(pm[j - 1], hyp[j - 1].end);

    // Superset of admissible DP columns per row, as [b, a] in 1-based column
    // space; empty when b > a. Using the prefix maximum makes b monotone-safe
    // even when hyp ends are not sorted.
    auto raw_range = [&](std::int64_t i) -> std::pair<std::int64_t, std::int64_t> {
        const double lo_time = ref[i - 1].start - collar;
        const double hi_time = ref[i - 1].end + collar;
        std::int64_t a = 0;
        {
            std::int64_t lo = 1, hi = m;
            while (lo <= hi) {
                std::int64_t mid = (lo + hi) / 2;
                if (hyp[mid - 1].start <= hi_time) {
                    a = mid;
                    lo = mid + 1;
                } else {
                    hi = mid - 1;
                }
            }
        }
        std::int64_t b = m + 1;
        {
            std::int64_t lo = 1, hi = m;
            while (lo <= hi) {
                std::int64_t mid = (lo + hi) / 2;
                if (pm[mid] >= lo_time) {
                    b = mid;
                    hi = mid - 1;
                } else {
                    lo = mid + 1;
                }
            }
        }
        return {b, a};
    };

    std::vector<std::int64_t> ext_lo(n + 1, kInf64), ext_hi(n + 1, -1);
    auto blend = [&](std::int64_t row, std::int64_t lo, std::int64_t hi) {
        if (lo > hi) return;
        ext_lo[row] = std::min(ext_lo[row], lo);
        ext_hi[row] = std::max(ext_hi[row], hi);
    };
    for (std::int64_t i = 1; i <= n; ++i) {
        auto [b, a] = raw_range(i);
        blend(i, b, a);          // admissible cells of row i
        blend(i - 1, b - 1, a - 1);  // their diagonal predecessors
    }

    Corridor c;
    c.lo.assign(n + 1, 0);
    c.hi.assign(n + 1, 0);

    std::int64_t running = m;
    for (std::int64_t i = n; i >= 0; --i) {
        if (ext_lo[i] != kInf64) running = std::min(running, ext_lo[i]);
        c.lo[i] = std::clamp<std::int64_t>(running, 0, m);
    }
    c.lo[0] = 0;

    std::int64_t runhi = 0;
    for (std::int64_t i = 0; i <= n; ++i) {
        runhi = std::max(runhi, ext_hi[i]);
        std::int64_t v = std::max(runhi, c.lo[i]);
        if (i < n) v = std::max(v, c.lo[i + 1]);
        if (i == n) v = std::max(v, m);
        c.hi[i] = std::min(v, m);
        runhi = c.hi[i];
    }
    return c;
}

}  // namespace detail

namespace {

void check_sorted(std::span<const TimedWord> words, const char* side) {
    for (std::size_t i = 1; i < words.size(); ++i) {
        if (words[i].start < words[i - 1].start) {
            throw UnsortedInput(std::string(side) + " words are not sorted by start time");
        }
    }
}

struct TcDp {
    std::span<const TimedWord> ref, hyp;
    double collar;
    std::int64_t n, m;
    detail::Corridor corr;
    bool banded;
    std::vector<std::int64_t> offset;  // banded row offsets
    std::vector<std::int32_t> cells;

    bool admissible(std::int64_t i, std::int64_t j) const {
        const TimedWord& r = ref[i - 1];
        const TimedWord& h = hyp[j - 1];
        return h.start <= r.end + collar && h.end >= r.start - collar;
    }
    bool in_corridor(std::int64_t i, std::int64_t j) const {
        return j >= corr.lo[i] && j <= corr.hi[i];
    }
    std::int32_t& at(std::int64_t i, std::int64_t j) {
        return banded ? cells[offset[i] + (j - corr.lo[i])] : cells[i * (m + 1) + j];
    }
    std::int32_t value(std::int64_t i, std::int64_t j) const {
        return banded ? cells[offset[i] + (j - corr.lo[i])] : cells[i * (m + 1) + j];
    }
};

}  // namespace

EditSummary time_constrained_align(std::span<const TimedWord> ref, std::span<const TimedWord> hyp,
                                   double collar, DpMode mode) {
    check_sorted(ref, "ref");
    check_sorted(hyp, "hyp");

    TcDp dp;
    dp.ref = ref;
    dp.hyp = hyp;
    dp.collar = collar;
    dp.n = static_cast<std::int64_t>(ref.size());
    dp.m = static_cast<std::int64_t>(hyp.size());
    dp.corr = detail::build_corridor(ref, hyp, collar);
    dp.banded = mode == DpMode::Banded;

    if (dp.banded) {
        dp.offset.assign(dp.n + 1, 0);
        std::int64_t total = 0;
        for (std::int64_t i = 0; i <= dp.n; ++i) {
            dp.offset[i] = total;
            total += dp.corr.hi[i] - dp.corr.lo[i] + 1;
        }
        dp.cells.assign(total, kInf32);

        for (std::int64_t j = dp.corr.lo[0]; j <= dp.corr.hi[0]; ++j) dp.at(0, j) = static_cast<std::int32_t>(j);
        for (std::int64_t i = 1; i <= dp.n; ++i) {
            for (std::int64_t j = dp.corr.lo[i]; j <= dp.corr.hi[i]; ++j) {
                std::int32_t best = kInf32;
                if (j >= 1 && dp.in_corridor(i - 1, j - 1) && dp.admissible(i, j)) {
                    const bool eq = ref[i - 1].text == hyp[j - 1].text;
                    best = dp.value(i - 1, j - 1) + (eq ? 0 : 1);
                }
                if (dp.in_corridor(i - 1, j)) best = std::min(best, dp.value(i - 1, j) + 1);
                if (j - 1 >= dp.corr.lo[i]) best = std::min(best, dp.value(i, j - 1) + 1);
                dp.at(i, j) = best;
            }
        }
    } else {
        dp.cells.assign((dp.n + 1) * (dp.m + 1), kInf32);
        for (std::int64_t j = 0; j <= dp.m; ++j) dp.at(0, j) = static_cast<std::int32_t>(j);
        for (std::int64_t i = 1; i <= dp.n; ++i) {
            dp.at(i, 0) = static_cast<std::int32_t>(i);
            for (std::int64_t j = 1; j <= dp.m; ++j) {
                std::int32_t best = dp.value(i - 1, j) + 1;
                best = std::min(best, dp.value(i, j - 1) + 1);
                if (dp.admissible(i, j)) {
                    const bool eq = ref[i - 1].text == hyp[j - 1].text;
                    best = std::min(best, dp.value(i - 1, j - 1) + (eq ? 0 : 1));
                }
                dp.at(i, j) = best;
            }
        }
    }

    // Backtrack restricted to the corridor, preferring match > substitution >
    // deletion > insertion. Corridor values agree between the banded and the
    // full table, so both modes walk the same path.
    EditSummary s;
    s.ref_len = dp.n;
    std::int64_t i = dp.n, j = dp.m;
    while (i > 0 || j > 0) {
        const std::int32_t v = dp.value(i, j);
        if (i > 0 && j > 0 && dp.in_corridor(i - 1, j - 1) && dp.admissible(i, j)) {
            const bool eq = ref[i - 1].text == hyp[j - 1].text;
            if (eq && dp.value(i - 1, j - 1) == v) {
                ++s.matches;
                --i;
                --j;
                continue;
            }
            if (!eq && dp.value(i - 1, j - 1) + 1 == v) {
                ++s.substitutions;
                --i;
                --j;
                continue;
            }
        }
        if (i > 0 && dp.in_corridor(i - 1, j) && dp.value(i - 1, j) + 1 == v) {
            ++s.deletions;
            --i;
            continue;
        }
        assert(j > 0 && j - 1 >= dp.corr.lo[i] && dp.value(i, j - 1) + 1 == v);
        ++s.insertions;
        --j;
    }
    return s;
}

// --- Assignment ---------------------------------------------------------------

namespace {

// Jonker-Volgenant style O(N^3) solver on a square matrix, 1-based internals.
std::int64_t hungarian_square(const std::vector<std::int64_t>& a, int n, std::vector<int>& rowsol) {
    std::vector<std::int64_t> u(n + 1, 0), v(n + 1, 0), minv(n + 1);
    std::vector<int> p(n + 1, 0), way(n + 1, 0);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::fill(minv.begin(), minv.end(), kInf64);
        std::vector<char> used(n + 1, 0);
        do {
            used[j0] = 1;
            const int i0 = p[j0];
            int j1 = 0;
            std::int64_t delta = kInf64;
            for (int j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const std::int64_t cur = a[(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const int j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0);
    }
    rowsol.assign(n, -1);
    for (int j = 1; j <= n; ++j) {
        if (p[j]) rowsol[p[j] - 1] = j - 1;
    }
    std::int64_t total = 0;
    for (int i = 0; i < n; ++i) total += a[i * n + rowsol[i]];
    return total;
}

// Minimum cost over partial injective mappings with some rows already fixed.
// state[r]: -2 free, -1 forced unmatched, >= 0 forced to that column.
std::int64_t padded_min_cost(const CostMatrix& c, std::span<const std::int64_t> urc,
                             std::span<const std::int64_t> ucc, const std::vector<int>& state) {
    const std::size_t rows = c.rows, cols = c.cols;
    std::vector<char> col_taken(cols, 0);
    std::int64_t base = 0;
    std::vector<std::size_t> free_rows;
    for (std::size_t r = 0; r < rows; ++r) {
        if (state[r] == -2) {
            free_rows.push_back(r);
        } else if (state[r] == -1) {
            base += urc[r];
        } else {
            base += c.at(r, static_cast<std::size_t>(state[r]));
            col_taken[static_cast<std::size_t>(state[r])] = 1;
        }
    }
    std::vector<std::size_t> free_cols;
    for (std::size_t j = 0; j < cols; ++j) {
        if (!col_taken[j]) free_cols.push_back(j);
    }

    const std::size_t fr = free_rows.size(), fc = free_cols.size();
    const std::size_t n = fr + fc;
    if (n == 0) return base;

    // Square padding: dummy columns absorb unmatched rows at their penalty,
    // dummy rows absorb unmatched columns, dummy-dummy pairs are free.
    std::vector<std::int64_t> a(n * n, 0);
    for (std::size_t i = 0; i < fr; ++i) {
        for (std::size_t j = 0; j < fc; ++j) a[i * n + j] = c.at(free_rows[i], free_cols[j]);
        for (std::size_t j = fc; j < n; ++j) a[i * n + j] = urc[free_rows[i]];
    }
    for (std::size_t i = fr; i < n; ++i) {
        for (std::size_t j = 0; j < fc; ++j) a[i * n + j] = ucc[free_cols[j]];
    }
    std::vector<int> rowsol;
    return base + hungarian_square(a, static_cast<int>(n), rowsol);
}

}  // namespace

Assignment solve_assignment(const CostMatrix& c, std::span<const std::int64_t> unmatched_row_cost,
                            std::span<const std::int64_t> unmatched_col_cost) {
    if (c.cost.size() != c.rows * c.cols) throw BadParams("cost matrix storage does not match its shape");
    if (unmatched_row_cost.size() != c.rows || unmatched_col_cost.size() != c.cols) {
        throw BadParams("penalty vector length does not match the cost matrix");
    }
    for (std::int64_t v : c.cost) {
        if (v < 0) throw BadParams("cost matrix entries must be >= 0");
    }
    for (std::int64_t v : unmatched_row_cost) {
        if (v < 0) throw BadParams("unmatched row penalties must be >= 0");
    }
    for (std::int64_t v : unmatched_col_cost) {
        if (v < 0) throw BadParams("unmatched column penalties must be >= 0");
    }

    std::vector<int> state(c.rows, -2);
    const std::int64_t best = padded_min_cost(c, unmatched_row_cost, unmatched_col_cost, state);

    // Fix rows one at a time to the smallest column (matched before
    // unmatched) that keeps the optimum attainable; this yields the
    // lexicographically smallest co-optimal mapping.
    for (std::size_t r = 0; r < c.rows; ++r) {
        std::vector<char> taken(c.cols, 0);
        for (std::size_t q = 0; q < r; ++q) {
            if (state[q] >= 0) taken[static_cast<std::size_t>(state[q])] = 1;
        }
        bool fixed = false;
        for (std::size_t j = 0; j <= c.cols; ++j) {
            if (j < c.cols && taken[j]) continue;
            state[r] = j < c.cols ? static_cast<int>(j) : -1;
            if (padded_min_cost(c, unmatched_row_cost, unmatched_col_cost, state) == best) {
                fixed = true;
                break;
            }
        }
        assert(fixed);
        (void)fixed;
    }

    Assignment out;
    out.total_cost = best;
    out.mapping.resize(c.rows);
    for (std::size_t r = 0; r < c.rows; ++r) {
        if (state[r] >= 0) out.mapping[r] = static_cast<std::size_t>(state[r]);
    }
    return out;
}

}  // namespace longscribe
