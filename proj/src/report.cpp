#include "dilemma/report.hpp"

#include "dilemma/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

using ordered_json = nlohmann::ordered_json;
using nlohmann::json;

namespace dilemma {

namespace {

std::string format_number(double v) {
    std::ostringstream out;
    out.precision(17);
    out << v;
    return out.str();
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

}  // namespace

double quantile(std::vector<double> values, double p) {
    if (values.empty()) throw Error(ErrorCode::InvalidArgument, "quantile of empty sample");
    std::sort(values.begin(), values.end());
    const double pos = p * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

SummaryStats summarize(const std::vector<double>& values) {
    if (values.empty()) throw Error(ErrorCode::InvalidArgument, "summary of empty sample");
    SummaryStats s;
    s.n = values.size();
    s.min = *std::min_element(values.begin(), values.end());
    s.max = *std::max_element(values.begin(), values.end());
    s.q1 = quantile(values, 0.25);
    s.median = quantile(values, 0.5);
    s.q3 = quantile(values, 0.75);
    double sum = 0.0;
    for (double v : values) sum += v;
    s.mean = sum / static_cast<double>(values.size());
    return s;
}

std::string report_label(const Author& author) {
    return author.kind == AuthorKind::Llm ? author.name : std::string(to_string(author.kind)) + ":" + author.name;
}

std::vector<CategoryTableRow> table_by_category(const std::vector<ScoreReport>& reports) {
    std::vector<CategoryTableRow> rows;
    for (const auto& r : reports) {
        if (r.author.kind != AuthorKind::Llm) continue;
        CategoryTableRow row{r.author.name, {}};
        const auto agg = aggregate_scores(r.cases);
        for (std::size_t i = 0; i < kAllSections.size(); ++i) {
            if (auto it = agg.section_means.find(kAllSections[i]); it != agg.section_means.end()) {
                row.cells[i] = it->second;
            }
        }
        if (agg.cases > 0) row.cells[5] = agg.final_mean;
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string table_to_csv(const std::vector<CategoryTableRow>& rows) {
    std::string out = "Model";
    for (auto kind : kAllSections) out += "," + std::string(section_label(kind));
    out += ",Final\n";
    for (const auto& row : rows) {
        out += row.model;
        for (const auto& cell : row.cells) {
            out += ',';
            if (cell) out += format_number(*cell);
        }
        out += '\n';
    }
    return out;
}

std::vector<CategoryTableRow> table_from_csv(const std::string& csv) {
    std::istringstream in(csv);
    std::string line;
    if (!std::getline(in, line) || split(line, ',').size() != 7) {
        throw Error(ErrorCode::MalformedRecord, "table header must have 7 columns");
    }
    std::vector<CategoryTableRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto fields = split(line, ',');
        if (fields.size() != 7) throw Error(ErrorCode::MalformedRecord, "table row must have 7 columns");
        CategoryTableRow row{fields[0], {}};
        for (std::size_t i = 0; i < 6; ++i) {
            if (!fields[i + 1].empty()) row.cells[i] = std::stod(fields[i + 1]);
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

MetricDistributions metric_distributions(const std::vector<ScoreReport>& reports) {
    MetricDistributions out;
    for (const auto& r : reports) {
        std::map<MetricId, std::vector<double>> values;
        for (const auto& c : r.cases) {
            for (const auto& s : c.sections) {
                // Human reports only carry KeyFactors, so this stays KeyFactors-only for them.
                for (const auto& [m, v] : s.per_metric) values[m].push_back(v);
            }
        }
        auto& entry = out[report_label(r.author)];
        for (const auto& [m, vs] : values) entry[m] = summarize(vs);
    }
    return out;
}

std::string distributions_to_json(const MetricDistributions& d, const std::string& manifest_hash) {
    ordered_json authors = ordered_json::object();
    for (const auto& [label, metrics] : d) {
        ordered_json mj = ordered_json::object();
        for (const auto& [m, s] : metrics) {
            mj[std::string(to_string(m))] = {{"n", s.n},   {"min", s.min}, {"q1", s.q1},     {"median", s.median},
                                             {"q3", s.q3}, {"max", s.max}, {"mean", s.mean}};
        }
        authors[label] = mj;
    }
    return ordered_json{{"quantile_convention", kQuantileConvention},
                        {"manifest_hash", manifest_hash},
                        {"distributions", authors}}
               .dump(2) +
           "\n";
}

MetricDistributions distributions_from_json(const std::string& json_text) {
    try {
        const auto j = json::parse(json_text);
        MetricDistributions out;
        for (const auto& [label, metrics] : j.at("distributions").items()) {
            for (const auto& [name, sj] : metrics.items()) {
                SummaryStats s;
                s.n = sj.at("n").get<std::size_t>();
                s.min = sj.at("min").get<double>();
                s.q1 = sj.at("q1").get<double>();
                s.median = sj.at("median").get<double>();
                s.q3 = sj.at("q3").get<double>();
                s.max = sj.at("max").get<double>();
                s.mean = sj.at("mean").get<double>();
                out[label][metric_from_string(name)] = s;
            }
        }
        return out;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::MalformedRecord, std::string("distributions: ") + e.what());
    }
}

std::vector<CohortRow> human_vs_llm_table(const std::vector<ScoreReport>& reports) {
    std::vector<CohortRow> humans, models;
    for (const auto& r : reports) {
        if (r.author.kind == AuthorKind::ExpertRef) continue;
        CohortRow row{report_label(r.author), r.author.kind, {}, 0.0, 0};
        std::map<MetricId, double> sums;
        double weighted = 0.0;
        for (const auto& c : r.cases) {
            const auto* kf = c.section(SectionKind::KeyFactors);
            if (!kf) continue;
            ++row.cases;
            weighted += kf->weighted;
            for (const auto& [m, v] : kf->per_metric) sums[m] += v;
        }
        if (row.cases > 0) {
            for (const auto& [m, v] : sums) row.key_factor_metrics[m] = v / static_cast<double>(row.cases);
            row.key_factor_weighted = weighted / static_cast<double>(row.cases);
        }
        (r.author.kind == AuthorKind::Human ? humans : models).push_back(std::move(row));
    }
    if (humans.empty()) throw Error(ErrorCode::MissingCohort, "no human reports");
    if (models.empty()) throw Error(ErrorCode::MissingCohort, "no llm reports");
    humans.insert(humans.end(), std::make_move_iterator(models.begin()), std::make_move_iterator(models.end()));
    return humans;
}

std::string cohort_to_csv(const std::vector<CohortRow>& rows, const std::array<MetricId, 4>& metrics) {
    std::string out = "author,kind,cases";
    for (auto m : metrics) out += "," + std::string(to_string(m));
    out += ",key_factors_weighted\n";
    for (const auto& row : rows) {
        out += row.author + "," + std::string(to_string(row.kind)) + "," + std::to_string(row.cases);
        for (auto m : metrics) {
            out += ',';
            if (auto it = row.key_factor_metrics.find(m); it != row.key_factor_metrics.end()) {
                out += format_number(it->second);
            }
        }
        out += "," + format_number(row.key_factor_weighted) + "\n";
    }
    return out;
}

}  // namespace dilemma
