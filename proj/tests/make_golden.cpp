// Regenerates the shipped test fixtures:
//   fixtures/corpus/{ref,hyp}/recNN.json   synthetic 20-recording corpus
//   fixtures/golden/report.{txt,json}      frozen report, values from the
//                                          brute-force oracles
//   fixtures/embeddings/two_blob.json      embedding document + labels file
//   fixtures/filter/boundary_pairs.json    exactly-30%-bad / 60%-speech doc
//   fixtures/convert/quantized.json        centisecond-round SegLST document
//
// The corpus is sized for the oracles: at most 8 words per side and
// recording, at most 4 speakers, so every metric value in the golden report
// comes from exhaustive search, never from the code under test.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>

#include <json.hpp>

#include "longscribe/diarize.hpp"
#include "longscribe/metrics.hpp"
#include "longscribe/transcript.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace longscribe;

namespace {

void write_file(const fs::path& path, std::string_view content) {
    fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    out << content;
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

const char* kVocab[] = {"the",  "meeting", "starts", "now",   "thanks", "agenda", "next",  "point",
                        "yes",  "no",      "maybe",  "budget", "review", "done",   "okay",  "right"};

std::string vocab_word(std::mt19937_64& rng) {
    return kVocab[std::uniform_int_distribution<std::size_t>(0, std::size(kVocab) - 1)(rng)];
}

// One synthetic recording pair. Total words per side stay within the
// brute-force bounds; timings are explicit so the oracles and the toolkit
// consume identical data.
std::pair<Transcript, Transcript> make_recording_pair(const std::string& id, std::mt19937_64& rng) {
    Transcript ref;
    ref.recording_id = id;
    ref.duration = 300.0;

    const int n_speakers = std::uniform_int_distribution<int>(2, 4)(rng);
    int ref_words_left = std::uniform_int_distribution<int>(5, 8)(rng);
    std::uniform_real_distribution<double> at(0.0, 280.0);
    for (int s = 1; s <= n_speakers && ref_words_left > 0; ++s) {
        const int n_segs = std::uniform_int_distribution<int>(1, 2)(rng);
        for (int g = 0; g < n_segs && ref_words_left > 0; ++g) {
            Segment seg;
            seg.speaker_id = "Speaker " + std::to_string(s);
            const int n_words = std::min(ref_words_left, std::uniform_int_distribution<int>(1, 3)(rng));
            ref_words_left -= n_words;
            seg.start = std::floor(at(rng) * 100.0) / 100.0;
            seg.end = seg.start + n_words * std::uniform_int_distribution<int>(1, 3)(rng);
            for (int w = 0; w < n_words; ++w) seg.words.push_back({vocab_word(rng), {}, {}});
            seg = estimate_word_timings(seg, TimingStrategy::Equidistant);
            ref.segments.push_back(std::move(seg));
        }
    }
    if (std::uniform_int_distribution<int>(0, 3)(rng) == 0) {
        Segment tag;
        tag.speaker_id = "Speaker 1";
        tag.start = 290.0;
        tag.end = 295.0;
        tag.tag = static_cast<AcousticTag>(std::uniform_int_distribution<int>(0, 5)(rng));
        ref.segments.push_back(std::move(tag));
    }
    canonicalize(ref);

    // Hypothesis: rename speakers, jitter times, corrupt some words.
    Transcript hyp;
    hyp.recording_id = id;
    hyp.duration = 300.0;
    std::vector<std::string> hyp_names{"spkA", "spkB", "spkC", "spkD"};
    std::shuffle(hyp_names.begin(), hyp_names.end(), rng);
    for (const Segment& seg : ref.segments) {
        Segment h;
        const std::size_t spk_index = static_cast<std::size_t>(seg.speaker_id.back() - '1');
        h.speaker_id = hyp_names[spk_index % hyp_names.size()];
        const double jitter = std::uniform_int_distribution<int>(-30, 30)(rng) / 100.0;
        h.start = std::max(0.0, seg.start + jitter);
        h.end = h.start + (seg.end - seg.start);
        h.tag = seg.tag;
        for (const Word& w : seg.words) {
            const int roll = std::uniform_int_distribution<int>(0, 99)(rng);
            if (roll < 8) continue;  // deletion
            std::string text = roll < 23 ? vocab_word(rng) : w.text;  // substitution
            h.words.push_back({std::move(text), {}, {}});
        }
        if (!seg.words.empty() && h.words.empty()) h.words.push_back({vocab_word(rng), {}, {}});
        if (!h.words.empty() && !h.tag) {
            h = estimate_word_timings(h, TimingStrategy::Equidistant);
        }
        hyp.segments.push_back(std::move(h));
    }
    canonicalize(hyp);
    return {std::move(ref), std::move(hyp)};
}

// Oracle-valued metric row for one recording pair. Stream preparation is
// shared with the toolkit (it is plain concatenation, unit-tested against
// manual assembly); every minimization below is exhaustive search.
RecordingRow oracle_row(const Transcript& ref, const Transcript& hyp, const EvalConfig& cfg) {
    RecordingRow row;
    row.recording_id = ref.recording_id;

    const auto rwords = word_stream(ref, cfg.normalize);
    const auto hwords = word_stream(hyp, cfg.normalize);
    const std::int64_t wer_cost = oracle::edit_cost(rwords, hwords);
    row.wer.summary = EditSummary{wer_cost, 0, 0, static_cast<std::int64_t>(rwords.size()) - wer_cost,
                                  static_cast<std::int64_t>(rwords.size())};

    const auto rplain = detail::plain_speaker_streams(ref, cfg.normalize);
    const auto hplain = detail::plain_speaker_streams(hyp, cfg.normalize);
    std::vector<std::vector<std::string>> rte, hte;
    for (const auto& s : rplain.streams) {
        rte.emplace_back();
        for (const auto& w : s) rte.back().push_back(w.text);
    }
    for (const auto& s : hplain.streams) {
        hte.emplace_back();
        for (const auto& w : s) hte.back().push_back(w.text);
    }
    std::int64_t ref_total = 0;
    for (const auto& s : rte) ref_total += static_cast<std::int64_t>(s.size());
    const std::int64_t cp_cost = oracle::cpwer_errors(rte, hte);
    row.cpwer.breakdown.summary = EditSummary{cp_cost, 0, 0, ref_total - cp_cost, ref_total};

    const auto rtimed = detail::timed_speaker_streams(ref, cfg);
    const auto htimed = detail::timed_speaker_streams(hyp, cfg);
    const oracle::MappedCost tcp = oracle::tcpwer_mapped(rtimed.streams, htimed.streams, cfg.collar_tcp);
    std::int64_t ref_total_t = 0;
    for (const auto& s : rtimed.streams) ref_total_t += static_cast<std::int64_t>(s.size());
    row.tcpwer.breakdown.summary =
        EditSummary{tcp.errors, 0, 0, ref_total_t - tcp.errors, ref_total_t};
    for (std::size_t i = 0; i < tcp.mapping.size(); ++i) {
        if (tcp.mapping[i] >= 0) {
            row.tcpwer.mapping.pairs.emplace_back(rtimed.speakers[i],
                                                  htimed.speakers[static_cast<std::size_t>(tcp.mapping[i])]);
        }
    }

    row.der = oracle::der(ref, hyp, cfg.collar_der);
    return row;
}

}  // namespace

int main(int argc, char** argv) {
    fs::path fixtures = LONGSCRIBE_FIXTURE_DIR;
    if (argc > 1) fixtures = argv[1];

    std::mt19937_64 rng(20260810);

    // 1. corpus
    std::vector<std::string> ids;
    for (int i = 1; i <= 20; ++i) {
        char id[8];
        std::snprintf(id, sizeof(id), "rec%02d", i);
        ids.emplace_back(id);
        auto [ref, hyp] = make_recording_pair(ids.back(), rng);
        if (i == 4) hyp.segments.clear();  // an empty hypothesis recording
        if (i == 7 || i == 17) {           // a spurious extra speaker
            Segment ghost;
            ghost.speaker_id = "ghost";
            ghost.start = 150.0;
            ghost.end = 154.0;
            ghost.words = {{vocab_word(rng), {}, {}}, {vocab_word(rng), {}, {}}};
            ghost = estimate_word_timings(ghost, TimingStrategy::Equidistant);
            hyp.segments.push_back(std::move(ghost));
            canonicalize(hyp);
        }
        if (i == 9 && hyp.segments.size() > 1) {  // speaker confusion on one turn
            hyp.segments[0].speaker_id = hyp.segments[1].speaker_id;
        }
        if (i == 15) {  // drift beyond the 5 s collar: tcpWER above cpWER
            for (Segment& s : hyp.segments) {
                s.start += 12.0;
                s.end += 12.0;
                for (Word& w : s.words) {
                    *w.start += 12.0;
                    *w.end += 12.0;
                }
            }
            hyp.duration = 320.0;
            canonicalize(hyp);
        }
        write_file(fixtures / "corpus" / "ref" / (ids.back() + ".json"), serialize_seglst(ref));
        write_file(fixtures / "corpus" / "hyp" / (ids.back() + ".json"), serialize_seglst(hyp));
    }

    // 2. golden report, re-reading what was shipped
    EvalConfig cfg;
    MetricReport report;
    for (const std::string& id : ids) {
        const Transcript ref = parse_seglst(read_file(fixtures / "corpus" / "ref" / (id + ".json")));
        const Transcript hyp = parse_seglst(read_file(fixtures / "corpus" / "hyp" / (id + ".json")));
        report.rows.push_back(oracle_row(ref, hyp, cfg));
    }
    const std::vector<std::pair<std::string, std::string>> extras{{"seed", "0"}};
    write_file(fixtures / "golden" / "report.txt", render_report_table(report, cfg, extras));
    write_file(fixtures / "golden" / "report.json", render_report_json(report, cfg, extras));

    // 3. two-blob embeddings with known generating labels
    {
        EmbeddingSet set;
        set.recording_id = "two_blob";
        set.dim = 8;
        std::normal_distribution<double> noise(0.0, 0.05);
        json labels = json::array();
        for (int i = 0; i < 40; ++i) {
            const bool second = i >= 20;
            EmbeddingFrame f;
            f.start = 0.75 * i;
            f.end = f.start + 1.5;
            for (std::size_t d = 0; d < set.dim; ++d) {
                const double base = (second ? d >= 4 : d < 4) ? 5.0 : 0.0;
                f.vector.push_back(base + noise(rng));
            }
            set.frames.push_back(std::move(f));
            labels.push_back(second ? 1 : 0);
        }
        write_file(fixtures / "embeddings" / "two_blob.json", serialize_embeddings(set));
        write_file(fixtures / "embeddings" / "two_blob_labels.json", labels.dump() + "\n");
    }

    // 4. boundary pairs document: 3 of 10 segments bad, speech exactly 60%
    {
        Transcript ref, hyp;
        ref.recording_id = hyp.recording_id = "boundary";
        ref.duration = hyp.duration = 100.0;
        for (int i = 0; i < 10; ++i) {
            Segment r, h;
            r.speaker_id = h.speaker_id = "Speaker 1";
            r.start = h.start = i * 10.0;
            r.end = h.end = r.start + 6.0;  // 10 x 6 s = 60% of 100 s
            for (int w = 0; w < 5; ++w) r.words.push_back({kVocab[w], {}, {}});
            h.words = r.words;
            if (i < 3) {  // two substitutions: WER 0.4 > 0.2
                h.words[0].text = "wrong";
                h.words[1].text = "words";
            }
            ref.segments.push_back(std::move(r));
            hyp.segments.push_back(std::move(h));
        }
        json pairs;
        pairs["ref"] = json::parse(serialize_seglst(ref));
        pairs["hyp"] = json::parse(serialize_seglst(hyp));
        write_file(fixtures / "filter" / "boundary_pairs.json", pairs.dump(2) + "\n");
    }

    // 5. centisecond-round SegLST document for lossless convert round-trips
    {
        Transcript t;
        t.recording_id = "quantized";
        t.duration = 4000.0;
        Segment a;
        a.speaker_id = "Speaker 1";
        a.start = 0.25;
        a.end = 2.5;
        a.words = {{"hello", {}, {}}, {"world", {}, {}}};
        Segment b;
        b.speaker_id = "Speaker 2";
        b.start = 3601.07;
        b.end = 3602.0;
        b.tag = AcousticTag::Music;
        t.segments = {a, b};
        canonicalize(t);
        write_file(fixtures / "convert" / "quantized.json", serialize_seglst(t));
    }

    std::cout << "fixtures written under " << fixtures << "\n";
    return 0;
}
