// Benchmark comparing the parallel kernels against their serial reference
// paths, and the banded time-constrained DP against the full-matrix DP.
// Usage: longscribe_bench [minutes] (default 15, 4 speakers).

#include <chrono>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "longscribe/diarize.hpp"
#include "longscribe/metrics.hpp"
#include "longscribe/parallel.hpp"

using namespace longscribe;

namespace {

double now_s() {
    return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch()).count();
}

const char* kVocab[] = {"alpha", "bravo", "charlie", "delta", "echo", "foxtrot", "golf", "hotel",
                        "india", "juliet", "kilo",    "lima",  "mike", "november", "oscar", "papa"};

std::pair<Transcript, Transcript> synth_pair(double minutes, std::mt19937_64& rng) {
    Transcript ref, hyp;
    ref.recording_id = hyp.recording_id = "bench";
    const double total = minutes * 60.0;
    double t = 0.0;
    int spk = 0;
    while (t + 5.0 < total) {
        Segment r;
        r.speaker_id = "Speaker " + std::to_string(spk % 4 + 1);
        r.start = t;
        for (int w = 0; w < 10; ++w) {
            const double ws = t + 0.4 * w;
            r.words.push_back(
                {kVocab[std::uniform_int_distribution<int>(0, 15)(rng)], ws, ws + 0.35});
        }
        r.end = t + 4.0;
        Segment h = r;
        for (Word& w : h.words) {
            if (std::uniform_int_distribution<int>(0, 99)(rng) < 5) {
                w.text = kVocab[std::uniform_int_distribution<int>(0, 15)(rng)];
            }
        }
        ref.segments.push_back(std::move(r));
        hyp.segments.push_back(std::move(h));
        t += 4.1;
        ++spk;
    }
    canonicalize(ref);
    canonicalize(hyp);
    return {std::move(ref), std::move(hyp)};
}

std::vector<EmbeddingFrame> synth_frames(std::size_t n, std::mt19937_64& rng) {
    std::vector<EmbeddingFrame> frames;
    std::normal_distribution<double> noise(0.0, 0.3);
    for (std::size_t i = 0; i < n; ++i) {
        EmbeddingFrame f;
        f.start = 0.75 * static_cast<double>(i);
        f.end = f.start + 1.5;
        const int blob = static_cast<int>(i) % 4;
        for (int d = 0; d < 16; ++d) f.vector.push_back((d % 4 == blob ? 4.0 : 0.0) + noise(rng));
        frames.push_back(std::move(f));
    }
    return frames;
}

void report(const char* name, double serial_s, double parallel_s) {
    std::printf("%-34s serial %8.3f s   parallel %8.3f s   speedup %.2fx\n", name, serial_s,
                parallel_s, parallel_s > 0 ? serial_s / parallel_s : 0.0);
}

}  // namespace

int main(int argc, char** argv) {
    const double minutes = argc > 1 ? std::atof(argv[1]) : 15.0;
    std::mt19937_64 rng(1);

#ifdef _OPENMP
    std::printf("OpenMP enabled, max threads %d\n", omp_get_max_threads());
#else
    std::printf("OpenMP not available; parallel runs fall back to serial\n");
#endif

    const auto [ref, hyp] = synth_pair(minutes, rng);
    std::size_t words = 0;
    for (const Segment& s : ref.segments) words += s.words.size();
    std::printf("synthetic pair: %.0f min, %zu segments, %zu words per side\n\n", minutes,
                ref.segments.size(), words);

    {
        EvalConfig serial;
        serial.jobs = 1;
        EvalConfig parallel;
        parallel.jobs = 0;
        double t0 = now_s();
        const PermutedWer a = tcpwer(ref, hyp, 5.0, serial);
        const double ts = now_s() - t0;
        t0 = now_s();
        const PermutedWer b = tcpwer(ref, hyp, 5.0, parallel);
        const double tp = now_s() - t0;
        report("tcpwer cost matrix (banded DP)", ts, tp);
        if (!(a.breakdown.summary == b.breakdown.summary)) {
            std::printf("MISMATCH between serial and parallel tcpwer\n");
            return 1;
        }
    }

    {
        // full-matrix reference vs banded corridor on one speaker pair
        EvalConfig banded;
        banded.jobs = 1;
        EvalConfig full = banded;
        full.dp_mode = DpMode::FullReference;
        const auto streams = detail::timed_speaker_streams(ref, banded);
        const auto hstreams = detail::timed_speaker_streams(hyp, banded);
        double t0 = now_s();
        const EditSummary a = time_constrained_align(streams.streams[0], hstreams.streams[0], 5.0, DpMode::Banded);
        const double tb = now_s() - t0;
        t0 = now_s();
        const EditSummary b =
            time_constrained_align(streams.streams[0], hstreams.streams[0], 5.0, DpMode::FullReference);
        const double tf = now_s() - t0;
        std::printf("%-34s banded %8.3f s   full     %8.3f s   speedup %.2fx\n",
                    "time-constrained DP, one pair", tb, tf, tb > 0 ? tf / tb : 0.0);
        if (!(a == b)) {
            std::printf("MISMATCH between banded and full DP\n");
            return 1;
        }
    }

    {
        const auto frames = synth_frames(800, rng);
        double t0 = now_s();
        const ClusterResult a = hdbscan(frames, 8, 4, DistanceMetric::Cosine, /*jobs=*/1);
        const double ts = now_s() - t0;
        t0 = now_s();
        const ClusterResult b = hdbscan(frames, 8, 4, DistanceMetric::Cosine, /*jobs=*/0);
        const double tp = now_s() - t0;
        report("hdbscan, 800 frames, dim 16", ts, tp);
        if (a.labels != b.labels) {
            std::printf("MISMATCH between serial and parallel hdbscan\n");
            return 1;
        }
    }

    {
        // corpus fan-out over replicas of a one-minute pair
        std::mt19937_64 rng2(2);
        const auto [small_ref, small_hyp] = synth_pair(1.0, rng2);
        std::vector<Transcript> refs, hyps;
        for (int i = 0; i < 16; ++i) {
            Transcript r = small_ref, h = small_hyp;
            r.recording_id = h.recording_id = "rec" + std::to_string(i);
            refs.push_back(std::move(r));
            hyps.push_back(std::move(h));
        }
        EvalConfig serial;
        serial.jobs = 1;
        EvalConfig parallel;
        parallel.jobs = 0;
        double t0 = now_s();
        const MetricReport a = evaluate_corpus(refs, hyps, serial);
        const double ts = now_s() - t0;
        t0 = now_s();
        const MetricReport b = evaluate_corpus(refs, hyps, parallel);
        const double tp = now_s() - t0;
        report("evaluate_corpus, 16 recordings", ts, tp);
        if (render_report_json(a, serial) != render_report_json(b, parallel)) {
            std::printf("MISMATCH between serial and parallel corpus reports\n");
            return 1;
        }
    }

    std::printf("\nall parallel results matched their serial references\n");
    return 0;
}
