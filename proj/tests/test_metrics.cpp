#include <doctest.h>

#include "generators.hpp"
#include "longscribe/metrics.hpp"
#include "oracles.hpp"

using namespace longscribe;

namespace {

Segment seg(const char* speaker, double start, double end, std::initializer_list<const char*> ws) {
    Segment s;
    s.speaker_id = speaker;
    s.start = start;
    s.end = end;
    for (const char* w : ws) s.words.push_back({w, std::nullopt, std::nullopt});
    return s;
}

Transcript transcript(std::initializer_list<Segment> segs, const char* id = "r") {
    Transcript t;
    t.recording_id = id;
    t.segments = segs;
    canonicalize(t);
    return t;
}

bool has_speech(const Transcript& t) {
    return std::any_of(t.segments.begin(), t.segments.end(),
                       [](const Segment& s) { return !s.tag && s.end > s.start; });
}

// Random bijective relabeling of the speakers of t.
Transcript relabel(const Transcript& t, gen::Rng& rng) {
    std::vector<std::string> labels;
    for (const Segment& s : t.segments) {
        if (std::find(labels.begin(), labels.end(), s.speaker_id) == labels.end()) {
            labels.push_back(s.speaker_id);
        }
    }
    std::vector<std::string> fresh;
    for (std::size_t i = 0; i < labels.size(); ++i) fresh.push_back("spk-" + std::to_string(i));
    std::shuffle(fresh.begin(), fresh.end(), rng);
    Transcript out = t;
    for (Segment& s : out.segments) {
        const auto it = std::find(labels.begin(), labels.end(), s.speaker_id);
        s.speaker_id = fresh[static_cast<std::size_t>(it - labels.begin())];
    }
    canonicalize(out);
    return out;
}

}  // namespace

TEST_CASE("wer: speaker labels are ignored") {
    const Transcript ref = transcript({seg("A", 0, 2, {"hello", "world"}), seg("B", 2, 4, {"bye"})});
    const Transcript hyp = transcript({seg("X", 0, 2, {"hello", "world"}), seg("Y", 2, 4, {"bye"})});
    CHECK(wer(ref, hyp).rate().value() == 0.0);
}

TEST_CASE("wer: empty hypothesis deletes the reference") {
    const Transcript ref =
        transcript({seg("A", 0, 10, {"a", "b", "c", "d", "e", "f", "g", "h", "i", "j"})});
    const WerBreakdown w = wer(ref, Transcript{});
    CHECK(w.summary.deletions == 10);
    CHECK(w.rate().value() == 1.0);
}

TEST_CASE("wer: equals the aligner on manually concatenated streams") {
    gen::Rng rng(200);
    for (int iter = 0; iter < 100; ++iter) {
        const Transcript ref = gen::random_transcript(rng, 3, 5, 4);
        const Transcript hyp = gen::random_transcript(rng, 3, 5, 4);
        const auto direct = levenshtein_align(word_stream(ref, false), word_stream(hyp, false));
        CHECK(wer(ref, hyp).summary == direct);
    }
}

TEST_CASE("wer: ref_len zero cases") {
    const Transcript empty;
    CHECK(wer(empty, empty).rate().value() == 0.0);
    const Transcript hyp = transcript({seg("A", 0, 1, {"ghost"})});
    const Ratio r = wer(empty, hyp).rate();
    CHECK(!r.defined());
    CHECK(std::isinf(r.value()));
}

TEST_CASE("wer: normalization lowercases and strips punctuation") {
    const Transcript ref = transcript({seg("A", 0, 2, {"Hello,", "World!"})});
    const Transcript hyp = transcript({seg("A", 0, 2, {"hello", "world"})});
    CHECK(wer(ref, hyp, false).rate().value() > 0.0);
    CHECK(wer(ref, hyp, true).rate().value() == 0.0);
    CHECK(normalize_token("Hello,") == "hello");
    CHECK(normalize_token("...").empty());
}

TEST_CASE("cpwer: bijective relabeling scores zero and is recovered") {
    const Transcript ref = transcript({seg("A", 0, 2, {"one", "two"}), seg("B", 2, 4, {"three"})});
    const Transcript hyp = transcript({seg("Z", 0, 2, {"one", "two"}), seg("Q", 2, 4, {"three"})});
    const PermutedWer p = cpwer(ref, hyp);
    CHECK(p.breakdown.rate().value() == 0.0);
    REQUIRE(p.mapping.pairs.size() == 2);
    CHECK(p.mapping.pairs[0] == std::pair<std::string, std::string>{"A", "Z"});
    CHECK(p.mapping.pairs[1] == std::pair<std::string, std::string>{"B", "Q"});
}

TEST_CASE("cpwer: spurious speaker pays the unmatched penalty") {
    const Transcript ref = transcript({seg("A", 0, 3, {"x", "y", "z"})});
    const Transcript hyp = transcript({seg("H1", 0, 3, {"x", "y", "z"}), seg("H2", 3, 5, {"p", "q"})});
    const PermutedWer p = cpwer(ref, hyp);
    CHECK(p.breakdown.summary.insertions >= 2);
}

TEST_CASE("cpwer: equals exhaustive minimum over speaker mappings") {
    gen::Rng rng(201);
    for (int iter = 0; iter < 150; ++iter) {
        const Transcript ref = gen::random_transcript(rng, 5, 6, 3);
        const Transcript hyp = gen::random_transcript(rng, 5, 6, 3);
        const auto rs = detail::plain_speaker_streams(ref, false);
        const auto hs = detail::plain_speaker_streams(hyp, false);
        std::vector<std::vector<std::string>> rstreams, hstreams;
        for (const auto& s : rs.streams) {
            rstreams.emplace_back();
            for (const auto& w : s) rstreams.back().push_back(w.text);
        }
        for (const auto& s : hs.streams) {
            hstreams.emplace_back();
            for (const auto& w : s) hstreams.back().push_back(w.text);
        }
        const PermutedWer p = cpwer(ref, hyp);
        CHECK(p.breakdown.summary.edit_cost() == oracle::cpwer_errors(rstreams, hstreams));
    }
}

TEST_CASE("cpwer/tcpwer/der: invariant under bijective relabeling") {
    gen::Rng rng(202);
    for (int iter = 0; iter < 40; ++iter) {
        const Transcript ref = gen::random_transcript(rng, 4, 6, 4);
        const Transcript hyp = gen::random_transcript(rng, 4, 6, 4);
        if (!has_speech(ref)) continue;
        const auto base_cp = cpwer(ref, hyp).breakdown.summary.edit_cost();
        const auto base_tcp = tcpwer(ref, hyp, 5.0).breakdown.summary.edit_cost();
        const auto base_der = der(ref, hyp, 0.25);
        for (int round = 0; round < 3; ++round) {
            const Transcript ref2 = relabel(ref, rng);
            const Transcript hyp2 = relabel(hyp, rng);
            CHECK(cpwer(ref2, hyp2).breakdown.summary.edit_cost() == base_cp);
            CHECK(tcpwer(ref2, hyp2, 5.0).breakdown.summary.edit_cost() == base_tcp);
            CHECK(der(ref2, hyp2, 0.25) == base_der);
        }
    }
}

TEST_CASE("tcpwer: identical transcripts rate zero at any collar") {
    gen::Rng rng(203);
    const Transcript t = gen::random_transcript(rng, 3, 6, 4);
    for (double collar : {0.0, 0.25, 5.0}) {
        CHECK(tcpwer(t, t, collar).breakdown.rate().value() == 0.0);
    }
}

TEST_CASE("tcpwer: shifting beyond the collar forbids all pairings") {
    const Transcript ref = transcript({seg("A", 0.0, 0.5, {"a", "b"}), seg("B", 0.5, 1.0, {"c"})});
    Transcript hyp = ref;
    for (Segment& s : hyp.segments) {
        s.start += 10.0;
        s.end += 10.0;
    }
    canonicalize(hyp);
    const PermutedWer p = tcpwer(ref, hyp, 5.0);
    CHECK(p.breakdown.rate().value() == 2.0);  // all deletions plus all insertions, unclipped
}

TEST_CASE("tcpwer: equals composed brute force on small instances") {
    gen::Rng rng(204);
    for (int iter = 0; iter < 60; ++iter) {
        const Transcript ref = gen::random_transcript(rng, 4, 5, 3);
        const Transcript hyp = gen::random_transcript(rng, 4, 5, 3);
        const double collar = std::uniform_real_distribution<double>(0.0, 10.0)(rng);
        const EvalConfig cfg;
        const auto rs = detail::timed_speaker_streams(ref, cfg);
        const auto hs = detail::timed_speaker_streams(hyp, cfg);
        const PermutedWer p = tcpwer(ref, hyp, collar, cfg);
        CHECK(p.breakdown.summary.edit_cost() == oracle::tcpwer_errors(rs.streams, hs.streams, collar));
    }
}

TEST_CASE("tcpwer: collar monotone, huge collar equals cpwer exactly") {
    gen::Rng rng(205);
    for (int iter = 0; iter < 60; ++iter) {
        const Transcript ref = gen::random_transcript(rng, 3, 5, 4);
        const Transcript hyp = gen::random_transcript(rng, 3, 5, 4);
        std::int64_t prev = std::numeric_limits<std::int64_t>::max();
        for (double collar : {0.0, 0.25, 1.0, 5.0, 30.0}) {
            const auto cost = tcpwer(ref, hyp, collar).breakdown.summary.edit_cost();
            CHECK(cost <= prev);
            prev = cost;
        }
        for (double collar : {1e6, std::numeric_limits<double>::infinity()}) {
            const PermutedWer big = tcpwer(ref, hyp, collar);
            const PermutedWer cp = cpwer(ref, hyp);
            CHECK(big.breakdown.summary == cp.breakdown.summary);
            CHECK(big.mapping == cp.mapping);
        }
    }
}

TEST_CASE("tcpwer: interpolation off uses segment bounds, zero-length errors") {
    const Transcript ref = transcript({seg("A", 0, 2, {"a", "b"})});
    EvalConfig cfg;
    cfg.interpolate = false;
    CHECK(tcpwer(ref, ref, 5.0, cfg).breakdown.rate().value() == 0.0);

    const Transcript degenerate = transcript({seg("A", 1, 1, {"a"})});
    CHECK_THROWS_AS(tcpwer(degenerate, degenerate, 5.0, cfg), MissingTimings);
    CHECK(tcpwer(degenerate, degenerate, 5.0).breakdown.rate().value() == 0.0);
}

TEST_CASE("der: permuted labels score zero") {
    const Transcript ref = transcript({seg("A", 0, 10, {}), seg("B", 10, 20, {})});
    const Transcript hyp = transcript({seg("B", 0, 10, {}), seg("A", 10, 20, {})});
    CHECK(der(ref, hyp, 0.0).rate().value() == 0.0);
}

TEST_CASE("der: empty hypothesis misses everything") {
    const Transcript ref = transcript({seg("A", 0, 10, {"hi"})});
    const DerBreakdown d = der(ref, Transcript{}, 0.0);
    CHECK(d.missed() == 10.0);
    CHECK(d.rate().value() == 1.0);
}

TEST_CASE("der: hand-derived half-confusion case") {
    const Transcript ref = transcript({seg("A", 0, 10, {})});
    const Transcript hyp = transcript({seg("X", 0, 5, {}), seg("Y", 5, 10, {})});
    const DerBreakdown d = der(ref, hyp, 0.0);
    CHECK(d.confusion() == 5.0);
    CHECK(d.missed() == 0.0);
    CHECK(d.false_alarm() == 0.0);
    CHECK(d.rate().value() == 0.5);
}

TEST_CASE("der: empty reference is an error") {
    const Transcript hyp = transcript({seg("X", 0, 5, {})});
    CHECK_THROWS_AS(der(Transcript{}, hyp, 0.25), EmptyReference);
    Transcript tags;
    tags.segments.push_back({"A", 0, 5, {}, AcousticTag::Silence});
    CHECK_THROWS_AS(der(tags, hyp, 0.25), EmptyReference);
}

TEST_CASE("der: matches the exhaustive oracle on random instances") {
    gen::Rng rng(206);
    for (int iter = 0; iter < 80; ++iter) {
        const Transcript ref = gen::random_transcript(rng, 4, 6, 2);
        const Transcript hyp = gen::random_transcript(rng, 4, 6, 2);
        if (!has_speech(ref)) continue;
        for (double collar : {0.0, 0.25}) {
            CHECK(der(ref, hyp, collar) == oracle::der(ref, hyp, collar));
        }
    }
}

TEST_CASE("der and tcpwer: non-increasing over the collar grid") {
    gen::Rng rng(208);
    for (int iter = 0; iter < 30; ++iter) {
        const Transcript ref = gen::random_transcript(rng, 3, 6, 3);
        const Transcript hyp = gen::random_transcript(rng, 3, 6, 3);
        if (!has_speech(ref)) continue;
        double prev_der = std::numeric_limits<double>::infinity();
        std::int64_t prev_tcp = std::numeric_limits<std::int64_t>::max();
        for (double collar : {0.0, 0.25, 1.0, 5.0, 30.0}) {
            const double d = der(ref, hyp, collar).rate().value();
            CHECK(d <= prev_der);
            prev_der = d;
            const auto c = tcpwer(ref, hyp, collar).breakdown.summary.edit_cost();
            CHECK(c <= prev_tcp);
            prev_tcp = c;
        }
    }
}

TEST_CASE("evaluate_corpus: identical corpora score zero everywhere") {
    gen::Rng rng(209);
    std::vector<Transcript> refs;
    while (refs.size() < 4) {
        Transcript t = gen::random_transcript(rng, 3, 5, 4);
        if (!has_speech(t)) continue;
        t.recording_id = "rec" + std::to_string(refs.size());
        refs.push_back(std::move(t));
    }
    const MetricReport report = evaluate_corpus(refs, refs, {});
    CHECK(report.rows.size() == 4);
    CHECK(report.issues.empty());
    for (const auto& row : report.rows) {
        CHECK(row.der.rate().value() == 0.0);
        CHECK(row.cpwer.breakdown.rate().value() == 0.0);
        CHECK(row.tcpwer.breakdown.rate().value() == 0.0);
        CHECK(row.wer.rate().value() == 0.0);
    }
    CHECK(report.corpus_wer().value() == 0.0);
}

TEST_CASE("evaluate_corpus: micro-average sums masses, not rates") {
    // recording a: 10 ref words, 5 errors; recording b: 90 ref words, 9 errors.
    Segment sa = seg("A", 0, 10, {});
    Segment sb = seg("B", 0, 90, {});
    for (int i = 0; i < 10; ++i) sa.words.push_back({"w" + std::to_string(i), std::nullopt, std::nullopt});
    for (int i = 0; i < 90; ++i) sb.words.push_back({"t" + std::to_string(i), std::nullopt, std::nullopt});
    Transcript ra = transcript({sa}, "a");
    Transcript rb = transcript({sb}, "b");
    Transcript ha = ra;
    Transcript hb = rb;
    for (int i = 0; i < 5; ++i) ha.segments[0].words[i].text = "x" + std::to_string(i);
    for (int i = 0; i < 9; ++i) hb.segments[0].words[i].text = "u" + std::to_string(i);

    const std::vector<Transcript> refs{ra, rb}, hyps{ha, hb};
    const MetricReport report = evaluate_corpus(refs, hyps, {});
    CHECK(report.rows[0].wer.rate().value() == doctest::Approx(0.5));
    CHECK(report.rows[1].wer.rate().value() == doctest::Approx(0.1));
    CHECK(report.corpus_wer().value() == doctest::Approx(0.14));
}

TEST_CASE("evaluate_corpus: missing pairs become issues, work continues") {
    const Transcript shared = transcript({seg("A", 0, 5, {"hello"})}, "shared");
    const Transcript ref_only = transcript({seg("A", 0, 5, {"one"})}, "ref-only");
    const Transcript hyp_only = transcript({seg("A", 0, 5, {"two"})}, "hyp-only");
    const std::vector<Transcript> refs{shared, ref_only};
    const std::vector<Transcript> hyps{shared, hyp_only};
    const MetricReport report = evaluate_corpus(refs, hyps, {});
    CHECK(report.rows.size() == 1);
    REQUIRE(report.issues.size() == 2);
    CHECK(report.issues[0].recording_id == "hyp-only");
    CHECK(report.issues[0].message == "missing reference");
    CHECK(report.issues[1].recording_id == "ref-only");
    CHECK(report.issues[1].message == "missing hypothesis");
}

TEST_CASE("evaluate_corpus: parallel evaluation is byte-identical to serial") {
    gen::Rng rng(211);
    std::vector<Transcript> refs, hyps;
    for (int i = 0; i < 6; ++i) {
        Transcript r = gen::random_transcript(rng, 3, 6, 4);
        Transcript h = gen::random_transcript(rng, 3, 6, 4);
        r.recording_id = h.recording_id = "rec" + std::to_string(i);
        refs.push_back(std::move(r));
        hyps.push_back(std::move(h));
    }
    EvalConfig serial;
    serial.jobs = 1;
    EvalConfig parallel;
    parallel.jobs = 4;
    const std::string a = render_report_json(evaluate_corpus(refs, hyps, serial), serial);
    const std::string b = render_report_json(evaluate_corpus(refs, hyps, parallel), parallel);
    CHECK(a == b);
}

TEST_CASE("report rendering: header echoes config, undefined rates named") {
    MetricReport report;
    RecordingRow row;
    row.recording_id = "only";
    row.wer.summary = EditSummary{0, 3, 0, 0, 0};  // hyp words against empty ref
    row.der.ref_speech_us = 1000000;
    report.rows.push_back(row);
    const EvalConfig cfg;
    const std::string table = render_report_table(report, cfg);
    CHECK(table.find("# collar_tcp_s: 5") != std::string::npos);
    CHECK(table.find("# collar_der_s: 0.25") != std::string::npos);
    CHECK(table.find("# normalize: off") != std::string::npos);
    CHECK(table.find("undefined") != std::string::npos);
    CHECK(table.find("AVERAGE") != std::string::npos);
    const std::string json = render_report_json(report, cfg);
    CHECK(json.find("\"wer\": null") != std::string::npos);
}
