#include "longscribe/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <tuple>

#include "longscribe/parallel.hpp"

namespace longscribe {

double Ratio::value() const {
    if (den > 0) return static_cast<double>(num) / static_cast<double>(den);
    if (num == 0) return 0.0;
    return std::numeric_limits<double>::infinity();
}

std::string normalize_token(std::string_view token) {
    std::string out;
    out.reserve(token.size());
    for (char c : token) {
        const auto uc = static_cast<unsigned char>(c);
        if (std::ispunct(uc)) continue;
        out.push_back(static_cast<char>(std::tolower(uc)));
    }
    return out;
}

std::vector<std::string> normalize_stream(std::span<const std::string> tokens) {
    std::vector<std::string> out;
    out.reserve(tokens.size());
    for (const auto& t : tokens) {
        std::string n = normalize_token(t);
        if (!n.empty()) out.push_back(std::move(n));
    }
    return out;
}

std::vector<std::string> word_stream(const Transcript& t, bool normalize) {
    std::vector<std::string> out;
    for (const Segment& s : t.segments) {
        if (s.tag) continue;
        for (const Word& w : s.words) out.push_back(w.text);
    }
    return normalize ? normalize_stream(out) : out;
}

WerBreakdown wer(const Transcript& ref, const Transcript& hyp, bool normalize) {
    const auto r = word_stream(ref, normalize);
    const auto h = word_stream(hyp, normalize);
    return WerBreakdown{levenshtein_align(r, h)};
}

// --- Per-speaker streams -----------------------------------------------------

namespace detail {

namespace {

std::vector<std::string> sorted_speakers(const Transcript& t) {
    std::set<std::string> labels;
    for (const Segment& s : t.segments) labels.insert(s.speaker_id);
    return {labels.begin(), labels.end()};
}

// Materializes word timings for one segment: explicit timings are kept,
// fully untimed segments are interpolated per config, and with interpolation
// off every untimed word inherits the segment bounds. A zero-length segment
// carries no ordering information, so that case is an error.
std::vector<TimedWord> timed_words(const Segment& s, const EvalConfig& cfg) {
    std::vector<TimedWord> out;
    const bool none_timed = std::none_of(s.words.begin(), s.words.end(),
                                         [](const Word& w) { return w.start || w.end; });
    if (none_timed && cfg.interpolate) {
        Segment est = estimate_word_timings(s, cfg.timing);
        for (const Word& w : est.words) out.push_back(TimedWord{w.text, *w.start, *w.end});
        return out;
    }
    for (const Word& w : s.words) {
        if (w.timed()) {
            out.push_back(TimedWord{w.text, *w.start, *w.end});
        } else {
            if (!cfg.interpolate && s.end == s.start) {
                throw MissingTimings("zero-length segment has words without timings");
            }
            out.push_back(TimedWord{w.text, s.start, s.end});
        }
    }
    return out;
}

}  // namespace

SpeakerStreams plain_speaker_streams(const Transcript& t, bool normalize) {
    SpeakerStreams out;
    out.speakers = sorted_speakers(t);
    out.streams.resize(out.speakers.size());
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < out.speakers.size(); ++i) index[out.speakers[i]] = i;
    for (const Segment& s : t.segments) {
        if (s.tag) continue;
        auto& stream = out.streams[index[s.speaker_id]];
        for (const Word& w : s.words) {
            if (normalize) {
                std::string n = normalize_token(w.text);
                if (!n.empty()) stream.push_back(TimedWord{std::move(n), 0.0, 0.0});
            } else {
                stream.push_back(TimedWord{w.text, 0.0, 0.0});
            }
        }
    }
    return out;
}

SpeakerStreams timed_speaker_streams(const Transcript& t, const EvalConfig& cfg) {
    SpeakerStreams out;
    out.speakers = sorted_speakers(t);
    out.streams.resize(out.speakers.size());
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < out.speakers.size(); ++i) index[out.speakers[i]] = i;
    for (const Segment& s : t.segments) {
        if (s.tag || s.words.empty()) continue;
        auto& stream = out.streams[index[s.speaker_id]];
        for (TimedWord& w : timed_words(s, cfg)) {
            if (cfg.normalize) {
                w.text = normalize_token(w.text);
                if (w.text.empty()) continue;
            }
            stream.push_back(std::move(w));
        }
    }
    // Same-speaker segments may overlap; the aligner needs start-sorted input.
    for (auto& stream : out.streams) {
        std::stable_sort(stream.begin(), stream.end(),
                         [](const TimedWord& a, const TimedWord& b) { return a.start < b.start; });
    }
    return out;
}

}  // namespace detail

// --- cpWER / tcpWER ----------------------------------------------------------

namespace {

std::vector<std::string> texts_of(const std::vector<TimedWord>& stream) {
    std::vector<std::string> out;
    out.reserve(stream.size());
    for (const auto& w : stream) out.push_back(w.text);
    return out;
}

PermutedWer permuted_wer(const detail::SpeakerStreams& ref, const detail::SpeakerStreams& hyp,
                         bool timed, double collar, const EvalConfig& cfg) {
    const std::size_t nr = ref.speakers.size();
    const std::size_t nh = hyp.speakers.size();

    // One edit summary per speaker pair. Cells are independent, so the
    // parallel build is bit-identical to the serial one.
    std::vector<EditSummary> cell(nr * nh);
    if (nh > 0) {
        parallel_for(nr * nh, cfg.jobs, [&](std::size_t idx) {
            const std::size_t i = idx / nh;
            const std::size_t j = idx % nh;
            if (timed) {
                cell[idx] = time_constrained_align(ref.streams[i], hyp.streams[j], collar, cfg.dp_mode);
            } else {
                cell[idx] = levenshtein_align(texts_of(ref.streams[i]), texts_of(hyp.streams[j]));
            }
        });
    }

    CostMatrix costs = CostMatrix::zeros(nr, nh);
    for (std::size_t idx = 0; idx < cell.size(); ++idx) costs.cost[idx] = cell[idx].edit_cost();
    std::vector<std::int64_t> row_pen(nr), col_pen(nh);
    for (std::size_t i = 0; i < nr; ++i) row_pen[i] = static_cast<std::int64_t>(ref.streams[i].size());
    for (std::size_t j = 0; j < nh; ++j) col_pen[j] = static_cast<std::int64_t>(hyp.streams[j].size());

    const Assignment a = solve_assignment(costs, row_pen, col_pen);

    PermutedWer out;
    std::vector<char> hyp_used(nh, 0);
    for (std::size_t i = 0; i < nr; ++i) {
        if (a.mapping[i]) {
            const std::size_t j = *a.mapping[i];
            hyp_used[j] = 1;
            out.mapping.pairs.emplace_back(ref.speakers[i], hyp.speakers[j]);
            const EditSummary& s = cell[i * nh + j];
            out.breakdown.summary.matches += s.matches;
            out.breakdown.summary.substitutions += s.substitutions;
            out.breakdown.summary.deletions += s.deletions;
            out.breakdown.summary.insertions += s.insertions;
            out.breakdown.summary.ref_len += s.ref_len;
        } else {
            out.breakdown.summary.deletions += row_pen[i];
            out.breakdown.summary.ref_len += row_pen[i];
        }
    }
    for (std::size_t j = 0; j < nh; ++j) {
        if (!hyp_used[j]) out.breakdown.summary.insertions += col_pen[j];
    }
    return out;
}

}  // namespace

PermutedWer cpwer(const Transcript& ref, const Transcript& hyp, const EvalConfig& cfg) {
    const auto r = detail::plain_speaker_streams(ref, cfg.normalize);
    const auto h = detail::plain_speaker_streams(hyp, cfg.normalize);
    return permuted_wer(r, h, /*timed=*/false, 0.0, cfg);
}

PermutedWer tcpwer(const Transcript& ref, const Transcript& hyp, double collar, const EvalConfig& cfg) {
    const auto r = detail::timed_speaker_streams(ref, cfg);
    const auto h = detail::timed_speaker_streams(hyp, cfg);
    return permuted_wer(r, h, /*timed=*/true, collar, cfg);
}

// --- DER -----------------------------------------------------------------------

namespace {

std::int64_t to_us(double seconds) { return std::llround(seconds * 1e6); }

struct SpeechSeg {
    std::size_t speaker;
    std::int64_t start_us;
    std::int64_t end_us;
};

struct SweepInterval {
    std::int64_t dur_us;
    std::vector<int> ref_count;  // multiplicity per ref speaker
    std::vector<int> hyp_count;  // multiplicity per hyp speaker
};

std::vector<SpeechSeg> speech_segments(const Transcript& t, std::vector<std::string>& speakers) {
    std::set<std::string> labels;
    for (const Segment& s : t.segments) {
        if (!s.tag) labels.insert(s.speaker_id);
    }
    speakers.assign(labels.begin(), labels.end());
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < speakers.size(); ++i) index[speakers[i]] = i;
    std::vector<SpeechSeg> out;
    for (const Segment& s : t.segments) {
        if (s.tag) continue;
        out.push_back(SpeechSeg{index[s.speaker_id], to_us(s.start), to_us(s.end)});
    }
    return out;
}

std::vector<std::pair<std::int64_t, std::int64_t>> merged_exclusions(const std::vector<SpeechSeg>& ref,
                                                                     std::int64_t collar_us) {
    std::vector<std::pair<std::int64_t, std::int64_t>> ex;
    if (collar_us <= 0) return ex;
    for (const SpeechSeg& s : ref) {
        ex.emplace_back(s.start_us - collar_us, s.start_us + collar_us);
        ex.emplace_back(s.end_us - collar_us, s.end_us + collar_us);
    }
    std::sort(ex.begin(), ex.end());
    std::vector<std::pair<std::int64_t, std::int64_t>> merged;
    for (const auto& e : ex) {
        if (!merged.empty() && e.first <= merged.back().second) {
            merged.back().second = std::max(merged.back().second, e.second);
        } else {
            merged.push_back(e);
        }
    }
    return merged;
}

// Elementary intervals between all boundaries with their active speaker
// multiplicities; regions within the collar exclusions are dropped.
std::vector<SweepInterval> sweep(const std::vector<SpeechSeg>& ref, std::size_t n_ref,
                                 const std::vector<SpeechSeg>& hyp, std::size_t n_hyp,
                                 std::int64_t collar_us) {
    struct Event {
        std::int64_t pos;
        bool is_ref;
        std::size_t speaker;
        int delta;
    };
    std::vector<Event> events;
    std::vector<std::int64_t> bounds;
    auto add = [&](const std::vector<SpeechSeg>& segs, bool is_ref) {
        for (const SpeechSeg& s : segs) {
            events.push_back({s.start_us, is_ref, s.speaker, +1});
            events.push_back({s.end_us, is_ref, s.speaker, -1});
            bounds.push_back(s.start_us);
            bounds.push_back(s.end_us);
        }
    };
    add(ref, true);
    add(hyp, false);
    const auto exclusions = merged_exclusions(ref, collar_us);
    for (const auto& e : exclusions) {
        bounds.push_back(e.first);
        bounds.push_back(e.second);
    }
    std::sort(bounds.begin(), bounds.end());
    bounds.erase(std::unique(bounds.begin(), bounds.end()), bounds.end());
    std::stable_sort(events.begin(), events.end(),
                     [](const Event& a, const Event& b) { return a.pos < b.pos; });

    std::vector<int> ref_count(n_ref, 0), hyp_count(n_hyp, 0);
    std::vector<SweepInterval> out;
    std::size_t ev = 0;
    std::size_t ex = 0;
    for (std::size_t b = 0; b + 1 < bounds.size(); ++b) {
        while (ev < events.size() && events[ev].pos <= bounds[b]) {
            auto& cnt = events[ev].is_ref ? ref_count : hyp_count;
            cnt[events[ev].speaker] += events[ev].delta;
            ++ev;
        }
        const std::int64_t lo = bounds[b];
        const std::int64_t hi = bounds[b + 1];
        if (hi <= lo) continue;
        while (ex < exclusions.size() && exclusions[ex].second <= lo) ++ex;
        if (ex < exclusions.size() && exclusions[ex].first <= lo && hi <= exclusions[ex].second) continue;
        if (std::all_of(ref_count.begin(), ref_count.end(), [](int v) { return v == 0; }) &&
            std::all_of(hyp_count.begin(), hyp_count.end(), [](int v) { return v == 0; })) {
            continue;
        }
        out.push_back(SweepInterval{hi - lo, ref_count, hyp_count});
    }
    return out;
}

}  // namespace

DerBreakdown der(const Transcript& ref, const Transcript& hyp, double collar) {
    std::vector<std::string> ref_speakers, hyp_speakers;
    const auto ref_segs = speech_segments(ref, ref_speakers);
    const auto hyp_segs = speech_segments(hyp, hyp_speakers);

    DerBreakdown out;
    for (const SpeechSeg& s : ref_segs) out.ref_speech_us += s.end_us - s.start_us;
    if (out.ref_speech_us <= 0) throw EmptyReference("reference has no speech time");

    const auto intervals =
        sweep(ref_segs, ref_speakers.size(), hyp_segs, hyp_speakers.size(), to_us(collar));

    // Speaker mapping: maximize total co-speaking time over the scored
    // timeline, solved as an assignment. All co-optimal mappings share the
    // maximized total, which is the only quantity the DER value depends on.
    const std::size_t nr = ref_speakers.size();
    const std::size_t nh = hyp_speakers.size();
    std::vector<std::int64_t> overlap(nr * nh, 0);
    for (const SweepInterval& iv : intervals) {
        for (std::size_t i = 0; i < nr; ++i) {
            if (!iv.ref_count[i]) continue;
            for (std::size_t j = 0; j < nh; ++j) {
                if (!iv.hyp_count[j]) continue;
                overlap[i * nh + j] += iv.dur_us * std::min(iv.ref_count[i], iv.hyp_count[j]);
            }
        }
    }
    std::vector<std::size_t> map_of(nr, static_cast<std::size_t>(-1));
    if (nr > 0 && nh > 0) {
        const std::int64_t big = *std::max_element(overlap.begin(), overlap.end());
        CostMatrix costs = CostMatrix::zeros(nr, nh);
        for (std::size_t idx = 0; idx < overlap.size(); ++idx) costs.cost[idx] = big - overlap[idx];
        const std::vector<std::int64_t> pen_r(nr, big), pen_c(nh, big);
        const Assignment a = solve_assignment(costs, pen_r, pen_c);
        for (std::size_t i = 0; i < nr; ++i) {
            if (a.mapping[i]) map_of[i] = *a.mapping[i];
        }
    }

    for (const SweepInterval& iv : intervals) {
        int total_ref = 0, total_hyp = 0, correct = 0;
        for (std::size_t i = 0; i < nr; ++i) {
            total_ref += iv.ref_count[i];
            if (iv.ref_count[i] && map_of[i] != static_cast<std::size_t>(-1)) {
                correct += std::min(iv.ref_count[i], iv.hyp_count[map_of[i]]);
            }
        }
        for (std::size_t j = 0; j < nh; ++j) total_hyp += iv.hyp_count[j];
        out.missed_us += iv.dur_us * std::max(0, total_ref - total_hyp);
        out.false_alarm_us += iv.dur_us * std::max(0, total_hyp - total_ref);
        out.confusion_us += iv.dur_us * (std::min(total_ref, total_hyp) - correct);
    }
    return out;
}

// --- Corpus ----------------------------------------------------------------------

Ratio MetricReport::corpus_der() const {
    Ratio r;
    for (const auto& row : rows) {
        r.num += row.der.error_us();
        r.den += row.der.ref_speech_us;
    }
    return r;
}
Ratio MetricReport::corpus_cpwer() const {
    Ratio r;
    for (const auto& row : rows) {
        r.num += row.cpwer.breakdown.summary.edit_cost();
        r.den += row.cpwer.breakdown.summary.ref_len;
    }
    return r;
}
Ratio MetricReport::corpus_tcpwer() const {
    Ratio r;
    for (const auto& row : rows) {
        r.num += row.tcpwer.breakdown.summary.edit_cost();
        r.den += row.tcpwer.breakdown.summary.ref_len;
    }
    return r;
}
Ratio MetricReport::corpus_wer() const {
    Ratio r;
    for (const auto& row : rows) {
        r.num += row.wer.summary.edit_cost();
        r.den += row.wer.summary.ref_len;
    }
    return r;
}

MetricReport evaluate_corpus(std::span<const Transcript> refs, std::span<const Transcript> hyps,
                             const EvalConfig& cfg) {
    std::map<std::string, const Transcript*> ref_by_id, hyp_by_id;
    for (const Transcript& t : refs) {
        if (!ref_by_id.emplace(t.recording_id, &t).second) {
            throw BadParams("duplicate reference recording_id '" + t.recording_id + "'");
        }
    }
    for (const Transcript& t : hyps) {
        if (!hyp_by_id.emplace(t.recording_id, &t).second) {
            throw BadParams("duplicate hypothesis recording_id '" + t.recording_id + "'");
        }
    }

    MetricReport report;
    struct Task {
        std::string id;
        const Transcript* ref;
        const Transcript* hyp;
    };
    std::vector<Task> tasks;
    for (const auto& [id, ref] : ref_by_id) {
        auto it = hyp_by_id.find(id);
        if (it == hyp_by_id.end()) {
            report.issues.push_back({id, "missing hypothesis"});
        } else {
            tasks.push_back({id, ref, it->second});
        }
    }
    for (const auto& [id, hyp] : hyp_by_id) {
        (void)hyp;
        if (!ref_by_id.count(id)) report.issues.push_back({id, "missing reference"});
    }

    std::vector<std::optional<RecordingRow>> slots(tasks.size());
    std::vector<std::string> errors(tasks.size());
    parallel_for(tasks.size(), cfg.jobs, [&](std::size_t i) {
        const Task& task = tasks[i];
        try {
            RecordingRow row;
            row.recording_id = task.id;
            row.wer = wer(*task.ref, *task.hyp, cfg.normalize);
            // The recordings are already fanned out; keep the inner kernels serial.
            EvalConfig inner = cfg;
            inner.jobs = 1;
            row.cpwer = cpwer(*task.ref, *task.hyp, inner);
            row.tcpwer = tcpwer(*task.ref, *task.hyp, cfg.collar_tcp, inner);
            row.der = der(*task.ref, *task.hyp, cfg.collar_der);
            slots[i] = std::move(row);
        } catch (const Error& e) {
            errors[i] = e.what();
        }
    });
    for (std::size_t i = 0; i < tasks.size(); ++i) {
        if (slots[i]) {
            report.rows.push_back(std::move(*slots[i]));
        } else {
            report.issues.push_back({tasks[i].id, errors[i]});
        }
    }
    std::stable_sort(report.issues.begin(), report.issues.end(),
                     [](const ReportIssue& a, const ReportIssue& b) {
                         return std::tie(a.recording_id, a.message) < std::tie(b.recording_id, b.message);
                     });
    return report;
}

}  // namespace longscribe
