// Command-line surface: evaluate corpora, run diarization from embedding
// documents, filter corpora, convert formats, and the small arithmetic
// helpers. Exit codes: 0 success, 1 parse/IO failure, 2 missing pairs.

#include <charconv>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "longscribe/diarize.hpp"
#include "longscribe/metrics.hpp"
#include "longscribe/pipeline.hpp"
#include "longscribe/version.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace longscribe;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitMissingPair = 2;

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const fs::path& path, std::string_view content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << content;
}

std::string shortest_double(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, ptr);
}

struct RunConfig {
    EvalConfig eval;
    std::uint64_t seed = 0;
    std::string format = "both";  // table | doc | both
    std::size_t min_cluster_size = 4;
    std::size_t min_samples = 2;
    double merge_threshold = 0.67;
    std::string cluster_metric = "cosine";

    std::vector<std::pair<std::string, std::string>> extras() const {
        return {{"seed", std::to_string(seed)}};
    }

    json header_json() const {
        json h;
        h["version"] = std::string(kVersion);
        h["collar_tcp_s"] = eval.collar_tcp;
        h["collar_der_s"] = eval.collar_der;
        h["normalize"] = eval.normalize;
        h["timing_strategy"] = std::string(to_string(eval.timing));
        h["dp_mode"] = std::string(to_string(eval.dp_mode));
        h["seed"] = seed;
        return h;
    }
};

void add_common_flags(CLI::App* cmd, RunConfig& cfg) {
    cmd->add_option("--collar-tcp", cfg.eval.collar_tcp, "tcpWER collar in seconds")
        ->capture_default_str();
    cmd->add_option("--collar-der", cfg.eval.collar_der, "DER boundary collar in seconds")
        ->capture_default_str();
    cmd->add_flag("--normalize", cfg.eval.normalize, "lowercase and strip punctuation before scoring");
    cmd->add_option_function<std::string>(
           "--timing-strategy",
           [&cfg](const std::string& v) {
               cfg.eval.timing = v == "char" ? TimingStrategy::CharProportional : TimingStrategy::Equidistant;
           },
           "word timing interpolation: equidistant|char")
        ->check(CLI::IsMember({"equidistant", "char"}));
    cmd->add_option_function<std::string>(
           "--dp", [&cfg](const std::string& v) { cfg.eval.dp_mode = v == "full" ? DpMode::FullReference : DpMode::Banded; },
           "alignment DP: banded|full")
        ->check(CLI::IsMember({"banded", "full"}));
    cmd->add_option("--jobs", cfg.eval.jobs, "worker threads (0 = all cores, 1 = serial)")
        ->envname("LONGSCRIBE_JOBS");
    cmd->add_option("--seed", cfg.seed, "seed recorded in output headers")->capture_default_str();
    cmd->add_option("--format", cfg.format, "report output: table|doc|both")
        ->check(CLI::IsMember({"table", "doc", "both"}))
        ->capture_default_str();
}

// Loads every *.json SegLST document under dir. Parse failures land in
// issues as "<path>: <error>" and do not stop the scan.
std::vector<Transcript> load_seglst_dir(const fs::path& dir, std::vector<ReportIssue>& issues) {
    std::vector<Transcript> out;
    std::vector<fs::path> paths;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".json") paths.push_back(entry.path());
    }
    std::sort(paths.begin(), paths.end());
    for (const fs::path& p : paths) {
        try {
            out.push_back(parse_seglst(read_file(p)));
        } catch (const Error& e) {
            issues.push_back({p.string(), e.what()});
        }
    }
    return out;
}

int cmd_eval(const fs::path& ref_dir, const fs::path& hyp_dir, const fs::path& out_dir,
             const RunConfig& cfg) {
    std::vector<ReportIssue> file_issues;
    const auto refs = load_seglst_dir(ref_dir, file_issues);
    const auto hyps = load_seglst_dir(hyp_dir, file_issues);
    const bool parse_failed = !file_issues.empty();

    MetricReport report = evaluate_corpus(refs, hyps, cfg.eval);
    const bool missing_pair = std::any_of(report.issues.begin(), report.issues.end(), [](const ReportIssue& i) {
        return i.message == "missing hypothesis" || i.message == "missing reference";
    });
    report.issues.insert(report.issues.begin(), file_issues.begin(), file_issues.end());

    const auto extras = cfg.extras();
    const std::string table = render_report_table(report, cfg.eval, extras);
    if (cfg.format != "doc") {
        write_file(out_dir / "report.txt", table);
        std::cout << table;
    }
    if (cfg.format != "table") {
        write_file(out_dir / "report.json", render_report_json(report, cfg.eval, extras));
    }
    if (!report.issues.empty()) {
        json manifest;
        manifest["header"] = cfg.header_json();
        manifest["issues"] = json::array();
        for (const auto& issue : report.issues) {
            manifest["issues"].push_back(json{{"recording_id", issue.recording_id}, {"message", issue.message}});
        }
        write_file(out_dir / "manifest.json", manifest.dump(2) + "\n");
        for (const auto& issue : report.issues) {
            std::cerr << "issue: " << issue.recording_id << ": " << issue.message << "\n";
        }
    }
    if (parse_failed) return kExitFailure;
    if (missing_pair) return kExitMissingPair;
    return kExitOk;
}

int cmd_diarize(const fs::path& input, const fs::path& output, const RunConfig& cfg) {
    const EmbeddingSet set = parse_embeddings(read_file(input));
    Transcript turns;
    turns.recording_id = set.recording_id;
    double noise_fraction = 0.0;
    int k = 0;
    if (!set.frames.empty()) {
        const DistanceMetric metric =
            cfg.cluster_metric == "euclidean" ? DistanceMetric::Euclidean : DistanceMetric::Cosine;
        ClusterResult clusters =
            hdbscan(set.frames, cfg.min_cluster_size, cfg.min_samples, metric, cfg.eval.jobs);
        clusters = merge_clusters(clusters, cfg.merge_threshold);
        turns.segments = frames_to_turns(set.frames, clusters.labels);
        canonicalize(turns);
        k = clusters.k;
        const auto noise = std::count(clusters.labels.begin(), clusters.labels.end(), -1);
        noise_fraction = static_cast<double>(noise) / static_cast<double>(clusters.labels.size());
    }
    json doc = json::parse(serialize_seglst(turns));
    doc["header"] = cfg.header_json();
    doc["header"]["min_cluster_size"] = cfg.min_cluster_size;
    doc["header"]["min_samples"] = cfg.min_samples;
    doc["header"]["merge_threshold"] = cfg.merge_threshold;
    doc["header"]["metric"] = cfg.cluster_metric;
    const std::string text = doc.dump(2) + "\n";
    if (output.empty()) {
        std::cout << text;
    } else {
        write_file(output, text);
    }
    std::cerr << "speakers: " << k << ", noise fraction: " << shortest_double(noise_fraction) << "\n";
    return kExitOk;
}

int cmd_convert(const fs::path& input, const std::string& from, const std::string& to,
                const fs::path& output) {
    const std::string text = read_file(input);
    const Transcript t = from == "rich" ? parse_rich_stream(text) : parse_seglst(text);
    if (to == "rich" && from == "seglst") {
        const bool timed = std::any_of(t.segments.begin(), t.segments.end(), [](const Segment& s) {
            return std::any_of(s.words.begin(), s.words.end(), [](const Word& w) { return w.timed(); });
        });
        if (timed) std::cerr << "warning: word timings are not representable in the rich stream and were dropped\n";
    }
    const std::string converted = to == "rich" ? render_rich_stream(t) : serialize_seglst(t);
    if (output.empty()) {
        std::cout << converted;
    } else {
        write_file(output, converted);
    }
    return kExitOk;
}

int cmd_filter(const fs::path& input, const fs::path& output, bool normalize, const RunConfig& cfg) {
    json doc;
    try {
        doc = json::parse(read_file(input));
    } catch (const nlohmann::json::parse_error& e) {
        throw SchemaError(std::string("not valid JSON: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("ref") || !doc.contains("hyp")) {
        throw SchemaError("pairs document needs 'ref' and 'hyp' SegLST objects");
    }
    const Transcript ref = parse_seglst(doc["ref"].dump());
    const Transcript hyp = parse_seglst(doc["hyp"].dump());
    if (ref.segments.size() != hyp.segments.size()) {
        throw SchemaError("ref and hyp must pair segments one-to-one");
    }
    if (!ref.duration) throw SchemaError("ref duration is required for the speech fraction");

    std::vector<std::pair<std::vector<std::string>, std::vector<std::string>>> pairs;
    double speech_seconds = 0.0;
    for (std::size_t i = 0; i < ref.segments.size(); ++i) {
        std::vector<std::string> r, h;
        for (const Word& w : ref.segments[i].words) r.push_back(w.text);
        for (const Word& w : hyp.segments[i].words) h.push_back(w.text);
        if (ref.segments[i].has_words()) speech_seconds += ref.segments[i].end - ref.segments[i].start;
        pairs.emplace_back(std::move(r), std::move(h));
    }
    const QualityReport report =
        quality_filter(pairs, speech_seconds, *ref.duration, normalize, ref.recording_id);

    json out;
    out["header"] = cfg.header_json();
    out["header"]["filter_normalize"] = normalize;
    out["recording_id"] = report.recording_id;
    out["keep"] = report.keep;
    out["bad_fraction"] = report.bad_fraction;
    out["speech_fraction"] = report.speech_fraction;
    out["segment_wers"] = json::array();
    for (double w : report.segment_wers) {
        if (std::isinf(w)) {
            out["segment_wers"].push_back(nullptr);
        } else {
            out["segment_wers"].push_back(w);
        }
    }
    const std::string text = out.dump(2) + "\n";
    if (output.empty()) {
        std::cout << text;
    } else {
        write_file(output, text);
        std::cout << (report.keep ? "keep" : "discard") << " bad_fraction="
                  << shortest_double(report.bad_fraction)
                  << " speech_fraction=" << shortest_double(report.speech_fraction) << "\n";
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"long-form multi-speaker transcription toolkit"};
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1);

    RunConfig cfg;

    // eval
    std::string ref_dir, hyp_dir, out_dir = ".";
    CLI::App* eval = app.add_subcommand("eval", "score a hypothesis corpus against a reference corpus");
    eval->add_option("ref_dir", ref_dir, "directory of reference SegLST documents")->required();
    eval->add_option("hyp_dir", hyp_dir, "directory of hypothesis SegLST documents")->required();
    eval->add_option("-o,--out", out_dir, "output directory for the reports")->capture_default_str();
    add_common_flags(eval, cfg);

    // diarize
    std::string emb_path, diar_out;
    CLI::App* diarize = app.add_subcommand("diarize", "turn an embeddings document into speaker turns");
    diarize->add_option("embeddings", emb_path, "embeddings JSON document")->required();
    diarize->add_option("-o,--out", diar_out, "output SegLST path (default stdout)");
    diarize->add_option("--min-cluster-size", cfg.min_cluster_size, "HDBSCAN minimum cluster size")
        ->capture_default_str();
    diarize->add_option("--min-samples", cfg.min_samples, "HDBSCAN core-distance neighbour count")
        ->capture_default_str();
    diarize->add_option("--merge-threshold", cfg.merge_threshold, "centroid cosine merge threshold")
        ->capture_default_str();
    diarize->add_option("--metric", cfg.cluster_metric, "clustering distance: cosine|euclidean")
        ->check(CLI::IsMember({"cosine", "euclidean"}))
        ->capture_default_str();
    diarize->add_option("--jobs", cfg.eval.jobs, "worker threads")->envname("LONGSCRIBE_JOBS");
    diarize->add_option("--seed", cfg.seed, "seed recorded in output headers");

    // convert
    std::string conv_in, conv_out, conv_from = "seglst", conv_to = "rich";
    CLI::App* convert = app.add_subcommand("convert", "convert between SegLST and the rich stream");
    convert->add_option("input", conv_in, "input file")->required();
    convert->add_option("-o,--out", conv_out, "output file (default stdout)");
    convert->add_option("--from", conv_from, "input format")->check(CLI::IsMember({"seglst", "rich"}));
    convert->add_option("--to", conv_to, "output format")->check(CLI::IsMember({"seglst", "rich"}));

    // filter
    std::string filter_in, filter_out;
    bool no_normalize = false;
    CLI::App* filter = app.add_subcommand("filter", "quality-filter a ref/hyp pairs document");
    filter->add_option("pairs", filter_in, "pairs JSON document with 'ref' and 'hyp'")->required();
    filter->add_option("-o,--out", filter_out, "output report path (default stdout)");
    filter->add_flag("--no-normalize", no_normalize, "score raw tokens instead of normalized text");
    filter->add_option("--seed", cfg.seed, "seed recorded in output headers");

    // budget
    double budget_seconds = 0.0, budget_rate = 7.5;
    CLI::App* budget = app.add_subcommand("budget", "token budget for a duration");
    budget->add_option("seconds", budget_seconds, "audio duration in seconds")->required();
    budget->add_option("--rate", budget_rate, "tokens per second")->capture_default_str();

    // chunk
    double chunk_seconds = 0.0, chunk_size = 240.0;
    CLI::App* chunk = app.add_subcommand("chunk", "fixed-size chunk intervals for a duration");
    chunk->add_option("seconds", chunk_seconds, "audio duration in seconds")->required();
    chunk->add_option("--size", chunk_size, "chunk length in seconds")->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        if (eval->parsed()) return cmd_eval(ref_dir, hyp_dir, out_dir, cfg);
        if (diarize->parsed()) return cmd_diarize(emb_path, diar_out, cfg);
        if (convert->parsed()) return cmd_convert(conv_in, conv_from, conv_to, conv_out);
        if (filter->parsed()) return cmd_filter(filter_in, filter_out, !no_normalize, cfg);
        if (budget->parsed()) {
            std::cout << token_budget(budget_seconds, budget_rate) << "\n";
            return kExitOk;
        }
        if (chunk->parsed()) {
            for (const Interval& iv : chunk_intervals(chunk_seconds, chunk_size)) {
                std::cout << shortest_double(iv.start) << " " << shortest_double(iv.end) << "\n";
            }
            return kExitOk;
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFailure;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFailure;
    }
    return kExitOk;
}
