#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>

#include <json.hpp>

#include "longscribe/metrics.hpp"
#include "longscribe/version.hpp"

namespace longscribe {

namespace {

using json = nlohmann::ordered_json;

std::string shortest_double(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, ptr);
}

// Percent cell, 2 decimals, or the undefined sentinel.
std::string percent_cell(const Ratio& r) {
    if (!r.defined()) return "undefined";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", r.percent());
    return buf;
}

json percent_json(const Ratio& r) {
    if (!r.defined()) return nullptr;
    return std::round(r.percent() * 100.0) / 100.0;
}

std::vector<std::pair<std::string, std::string>> header_fields(
    const EvalConfig& cfg, std::span<const std::pair<std::string, std::string>> extras) {
    std::vector<std::pair<std::string, std::string>> fields;
    fields.emplace_back("version", std::string(kVersion));
    fields.emplace_back("collar_tcp_s", shortest_double(cfg.collar_tcp));
    fields.emplace_back("collar_der_s", shortest_double(cfg.collar_der));
    fields.emplace_back("normalize", cfg.normalize ? "on" : "off");
    fields.emplace_back("timing_strategy", std::string(to_string(cfg.timing)));
    fields.emplace_back("dp_mode", std::string(to_string(cfg.dp_mode)));
    for (const auto& [k, v] : extras) fields.emplace_back(k, v);
    return fields;
}

}  // namespace

std::string_view to_string(TimingStrategy s) {
    return s == TimingStrategy::Equidistant ? "equidistant" : "char";
}

std::string_view to_string(DpMode m) { return m == DpMode::Banded ? "banded" : "full"; }

std::string render_report_table(const MetricReport& report, const EvalConfig& cfg,
                                std::span<const std::pair<std::string, std::string>> extras) {
    std::ostringstream out;
    out << "# " << kToolName << " evaluation report\n";
    for (const auto& [k, v] : header_fields(cfg, extras)) out << "# " << k << ": " << v << "\n";

    std::size_t id_width = 12;
    for (const auto& row : report.rows) id_width = std::max(id_width, row.recording_id.size());
    id_width = std::max(id_width, std::string("AVERAGE").size());

    auto line = [&](const std::string& id, const std::string& d, const std::string& cp,
                    const std::string& tcp, const std::string& w) {
        out << id;
        for (std::size_t i = id.size(); i < id_width; ++i) out << ' ';
        char buf[64];
        std::snprintf(buf, sizeof(buf), "  %9s  %9s  %9s  %9s", d.c_str(), cp.c_str(), tcp.c_str(),
                      w.c_str());
        out << buf << "\n";
    };
    line("recording_id", "DER", "cpWER", "tcpWER", "WER");
    for (const auto& row : report.rows) {
        line(row.recording_id, percent_cell(row.der.rate()), percent_cell(row.cpwer.breakdown.rate()),
             percent_cell(row.tcpwer.breakdown.rate()), percent_cell(row.wer.rate()));
    }
    line("AVERAGE", percent_cell(report.corpus_der()), percent_cell(report.corpus_cpwer()),
         percent_cell(report.corpus_tcpwer()), percent_cell(report.corpus_wer()));

    if (!report.issues.empty()) {
        out << "#\n";
        for (const auto& issue : report.issues) {
            out << "# issue: " << issue.recording_id << ": " << issue.message << "\n";
        }
    }
    return out.str();
}

std::string render_report_json(const MetricReport& report, const EvalConfig& cfg,
                               std::span<const std::pair<std::string, std::string>> extras) {
    json doc;
    doc["tool"] = kToolName;
    json header;
    for (const auto& [k, v] : header_fields(cfg, extras)) header[k] = v;
    doc["header"] = std::move(header);

    doc["rows"] = json::array();
    for (const auto& row : report.rows) {
        json r;
        r["recording_id"] = row.recording_id;
        r["der"] = percent_json(row.der.rate());
        r["cpwer"] = percent_json(row.cpwer.breakdown.rate());
        r["tcpwer"] = percent_json(row.tcpwer.breakdown.rate());
        r["wer"] = percent_json(row.wer.rate());
        json detail;
        detail["der_error_us"] = row.der.error_us();
        detail["der_missed_us"] = row.der.missed_us;
        detail["der_false_alarm_us"] = row.der.false_alarm_us;
        detail["der_confusion_us"] = row.der.confusion_us;
        detail["der_ref_speech_us"] = row.der.ref_speech_us;
        detail["cpwer_errors"] = row.cpwer.breakdown.summary.edit_cost();
        detail["tcpwer_errors"] = row.tcpwer.breakdown.summary.edit_cost();
        detail["wer_errors"] = row.wer.summary.edit_cost();
        detail["ref_words"] = row.wer.summary.ref_len;
        r["detail"] = std::move(detail);
        json mapping = json::object();
        for (const auto& [from, to] : row.tcpwer.mapping.pairs) mapping[from] = to;
        r["tcp_speaker_mapping"] = std::move(mapping);
        doc["rows"].push_back(std::move(r));
    }

    json avg;
    avg["der"] = percent_json(report.corpus_der());
    avg["cpwer"] = percent_json(report.corpus_cpwer());
    avg["tcpwer"] = percent_json(report.corpus_tcpwer());
    avg["wer"] = percent_json(report.corpus_wer());
    doc["average"] = std::move(avg);

    doc["issues"] = json::array();
    for (const auto& issue : report.issues) {
        doc["issues"].push_back(json{{"recording_id", issue.recording_id}, {"message", issue.message}});
    }
    return doc.dump(2) + "\n";
}

}  // namespace longscribe
