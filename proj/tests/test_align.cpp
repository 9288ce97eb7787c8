#include <doctest.h>

#include "generators.hpp"
#include "longscribe/align.hpp"
#include "oracles.hpp"

using namespace longscribe;

namespace {

std::vector<std::string> words(std::initializer_list<const char*> ws) {
    return {ws.begin(), ws.end()};
}

}  // namespace

TEST_CASE("levenshtein: identity") {
    const auto s = levenshtein_align(words({"a", "b"}), words({"a", "b"}));
    CHECK(s == EditSummary{0, 0, 0, 2, 2});
}

TEST_CASE("levenshtein: empty hypothesis deletes everything") {
    const auto s = levenshtein_align(words({"a", "b", "c"}), {});
    CHECK(s.deletions == 3);
    CHECK(s.ref_len == 3);
    CHECK(s.edit_cost() == 3);
}

TEST_CASE("levenshtein: cost equals brute-force minimum on random pairs") {
    gen::Rng rng(100);
    for (int iter = 0; iter < 300; ++iter) {
        const auto ref = gen::random_stream(rng, 8, 3);
        const auto hyp = gen::random_stream(rng, 8, 3);
        const auto s = levenshtein_align(ref, hyp);
        CHECK(s.edit_cost() == oracle::edit_cost(ref, hyp));
        CHECK(s.matches + s.substitutions + s.deletions == s.ref_len);
    }
}

TEST_CASE("levenshtein: distance symmetry swaps ins and del") {
    gen::Rng rng(101);
    for (int iter = 0; iter < 100; ++iter) {
        const auto a = gen::random_stream(rng, 8, 3);
        const auto b = gen::random_stream(rng, 8, 3);
        const auto ab = levenshtein_align(a, b);
        const auto ba = levenshtein_align(b, a);
        CHECK(ab.edit_cost() == ba.edit_cost());
    }
}

TEST_CASE("levenshtein: triangle sanity on random triples") {
    gen::Rng rng(102);
    for (int iter = 0; iter < 100; ++iter) {
        const auto a = gen::random_stream(rng, 6, 3);
        const auto b = gen::random_stream(rng, 6, 3);
        const auto c = gen::random_stream(rng, 6, 3);
        CHECK(levenshtein_align(a, c).edit_cost() <=
              levenshtein_align(a, b).edit_cost() + levenshtein_align(b, c).edit_cost());
    }
}

TEST_CASE("levenshtein: deterministic tie-break summary") {
    // ref=ab, hyp=ba has two co-optimal summaries; the backtrack preference
    // (match > sub > del > ins) pins the all-substitution one.
    const auto s = levenshtein_align(words({"a", "b"}), words({"b", "a"}));
    CHECK(s == EditSummary{2, 0, 0, 0, 2});
}

// --- time-constrained --------------------------------------------------------

namespace {

TimedWord tw(const char* text, double start, double end) { return {text, start, end}; }

}  // namespace

TEST_CASE("tc-align: identical timed words match at any collar") {
    std::vector<TimedWord> ws{tw("a", 0, 1), tw("b", 1, 2), tw("c", 2.5, 3)};
    for (double collar : {0.0, 0.25, 5.0}) {
        const auto s = time_constrained_align(ws, ws, collar);
        CHECK(s.matches == 3);
        CHECK(s.edit_cost() == 0);
    }
}

TEST_CASE("tc-align: far pairing is forbidden") {
    const std::vector<TimedWord> ref{tw("a", 0, 1)};
    const std::vector<TimedWord> hyp{tw("a", 10, 11)};
    const auto s = time_constrained_align(ref, hyp, 5.0);
    CHECK(s == EditSummary{0, 1, 1, 0, 1});
}

TEST_CASE("tc-align: unsorted input is rejected") {
    const std::vector<TimedWord> bad{tw("a", 2, 3), tw("b", 0, 1)};
    const std::vector<TimedWord> ok{tw("a", 0, 1)};
    CHECK_THROWS_AS(time_constrained_align(bad, ok, 1.0), UnsortedInput);
    CHECK_THROWS_AS(time_constrained_align(ok, bad, 1.0), UnsortedInput);
}

TEST_CASE("tc-align: cost equals brute force over admissible alignments") {
    gen::Rng rng(103);
    for (int iter = 0; iter < 300; ++iter) {
        const auto ref = gen::random_timed_stream(rng, 6, 3, 4.0);
        const auto hyp = gen::random_timed_stream(rng, 6, 3, 4.0);
        const double collar = std::uniform_real_distribution<double>(0.0, 2.0)(rng);
        const auto s = time_constrained_align(ref, hyp, collar);
        CHECK(s.edit_cost() == oracle::tc_edit_cost(ref, hyp, collar));
        CHECK(s.matches + s.substitutions + s.deletions == s.ref_len);
    }
}

TEST_CASE("tc-align: banded and full DP are bit-identical") {
    gen::Rng rng(104);
    for (int iter = 0; iter < 200; ++iter) {
        const auto ref = gen::random_timed_stream(rng, 40, 5, 30.0);
        const auto hyp = gen::random_timed_stream(rng, 40, 5, 30.0);
        const double collar = std::uniform_real_distribution<double>(0.0, 3.0)(rng);
        const auto banded = time_constrained_align(ref, hyp, collar, DpMode::Banded);
        const auto full = time_constrained_align(ref, hyp, collar, DpMode::FullReference);
        CHECK(banded == full);
    }
}

TEST_CASE("tc-align: collar monotonicity, reaching the unconstrained cost") {
    gen::Rng rng(105);
    for (int iter = 0; iter < 100; ++iter) {
        const auto ref = gen::random_timed_stream(rng, 8, 3, 6.0);
        const auto hyp = gen::random_timed_stream(rng, 8, 3, 6.0);
        std::int64_t prev = std::numeric_limits<std::int64_t>::max();
        for (double collar : {0.0, 0.25, 1.0, 5.0, 30.0}) {
            const auto cost = time_constrained_align(ref, hyp, collar).edit_cost();
            CHECK(cost <= prev);
            prev = cost;
        }
        std::vector<std::string> rw, hw;
        for (const auto& w : ref) rw.push_back(w.text);
        for (const auto& w : hyp) hw.push_back(w.text);
        CHECK(time_constrained_align(ref, hyp, 1e9) == levenshtein_align(rw, hw));
    }
}

TEST_CASE("tc-align: corridor covers admissible cells and the corners") {
    gen::Rng rng(106);
    for (int iter = 0; iter < 100; ++iter) {
        const auto ref = gen::random_timed_stream(rng, 12, 3, 8.0);
        const auto hyp = gen::random_timed_stream(rng, 12, 3, 8.0);
        const double collar = std::uniform_real_distribution<double>(0.0, 2.0)(rng);
        const auto c = detail::build_corridor(ref, hyp, collar);
        const auto n = static_cast<std::int64_t>(ref.size());
        const auto m = static_cast<std::int64_t>(hyp.size());
        CHECK(c.lo[0] == 0);
        CHECK(c.hi[n] == m);
        for (std::int64_t i = 0; i <= n; ++i) {
            CHECK(c.lo[i] <= c.hi[i]);
            if (i > 0) {
                CHECK(c.lo[i - 1] <= c.lo[i]);
                CHECK(c.hi[i - 1] <= c.hi[i]);
                CHECK(c.lo[i] <= c.hi[i - 1]);
            }
        }
        for (std::int64_t i = 1; i <= n; ++i) {
            for (std::int64_t j = 1; j <= m; ++j) {
                const bool adm = hyp[j - 1].start <= ref[i - 1].end + collar &&
                                 hyp[j - 1].end >= ref[i - 1].start - collar;
                if (adm) {
                    CHECK(c.lo[i] <= j);
                    CHECK(j <= c.hi[i]);
                    CHECK(c.lo[i - 1] <= j - 1);
                    CHECK(j - 1 <= c.hi[i - 1]);
                }
            }
        }
    }
}

// --- assignment ----------------------------------------------------------------

TEST_CASE("assignment: identity-favoring matrix") {
    CostMatrix c = CostMatrix::zeros(2, 2);
    c.at(0, 0) = 0;
    c.at(0, 1) = 9;
    c.at(1, 0) = 9;
    c.at(1, 1) = 0;
    const std::int64_t zeros[2] = {0, 0};
    const Assignment a = solve_assignment(c, zeros, zeros);
    CHECK(a.total_cost == 0);
    CHECK(a.mapping[0] == 0);
    CHECK(a.mapping[1] == 1);
}

TEST_CASE("assignment: unmatched column pays its penalty") {
    CostMatrix c = CostMatrix::zeros(1, 2);
    c.at(0, 0) = 5;
    c.at(0, 1) = 3;
    const std::int64_t row_pen[1] = {7};
    const std::int64_t col_pen[2] = {2, 2};
    const Assignment a = solve_assignment(c, row_pen, col_pen);
    CHECK(a.total_cost == 5);  // 3 + unmatched col 0
    CHECK(a.mapping[0] == 1);
}

TEST_CASE("assignment: matches brute force with penalties") {
    gen::Rng rng(107);
    for (int iter = 0; iter < 200; ++iter) {
        const std::size_t rows = std::uniform_int_distribution<std::size_t>(0, 6)(rng);
        const std::size_t cols = std::uniform_int_distribution<std::size_t>(0, 6)(rng);
        CostMatrix c = CostMatrix::zeros(rows, cols);
        std::uniform_int_distribution<std::int64_t> cost(0, 20);
        for (auto& v : c.cost) v = cost(rng);
        std::vector<std::int64_t> row_pen(rows), col_pen(cols);
        for (auto& v : row_pen) v = cost(rng);
        for (auto& v : col_pen) v = cost(rng);
        const Assignment a = solve_assignment(c, row_pen, col_pen);
        CHECK(a.total_cost == oracle::assignment_cost(c, row_pen, col_pen));

        // the reported mapping really costs total_cost
        std::int64_t check = 0;
        std::vector<char> used(cols, 0);
        for (std::size_t r = 0; r < rows; ++r) {
            if (a.mapping[r]) {
                check += c.at(r, *a.mapping[r]);
                CHECK(!used[*a.mapping[r]]);
                used[*a.mapping[r]] = 1;
            } else {
                check += row_pen[r];
            }
        }
        for (std::size_t j = 0; j < cols; ++j) {
            if (!used[j]) check += col_pen[j];
        }
        CHECK(check == a.total_cost);
    }
}

TEST_CASE("assignment: lexicographically smallest mapping among optima") {
    // All-zero costs: every full matching is optimal; the smallest mapping
    // is the identity prefix.
    CostMatrix c = CostMatrix::zeros(3, 3);
    const std::vector<std::int64_t> pen(3, 0);
    const Assignment a = solve_assignment(c, pen, pen);
    // zero penalties also make "all unmatched" optimal; matched-to-0 orders
    // before unmatched, so row 0 takes column 0, and so on.
    CHECK(a.mapping[0] == 0);
    CHECK(a.mapping[1] == 1);
    CHECK(a.mapping[2] == 2);
}
