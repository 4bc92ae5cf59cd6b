#include "opsgraph/evaluation.hpp"

#include <algorithm>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "opsgraph/error.hpp"

namespace opsgraph {

using nlohmann::json;

namespace {

std::set<TripleKey> triples_of(const KnowledgeGraph& g) {
    std::set<TripleKey> out;
    for (const auto& [key, edge] : g.edges) out.insert(key);
    return out;
}

std::string triple_text(const TripleKey& k) {
    return k.subject + " " + std::string(to_string(k.predicate)) + " " + k.object;
}

std::string provenance_text(const std::vector<Provenance>& prov) {
    std::string out;
    for (const auto& p : prov) {
        out += out.empty() ? "" : " ";
        out += p.document_id + ":" + std::to_string(p.interval.start) + "-" + std::to_string(p.interval.end);
    }
    return out;
}

}  // namespace

TripleMatch match_triples(const KnowledgeGraph& extracted, const KnowledgeGraph& truth) {
    const auto e = triples_of(extracted);
    const auto t = triples_of(truth);
    TripleMatch m;
    std::set_intersection(e.begin(), e.end(), t.begin(), t.end(), std::inserter(m.tp, m.tp.end()));
    std::set_difference(e.begin(), e.end(), t.begin(), t.end(), std::inserter(m.fp, m.fp.end()));
    std::set_difference(t.begin(), t.end(), e.begin(), e.end(), std::inserter(m.fn, m.fn.end()));
    return m;
}

EvalMetrics metrics(const EvalCounts& c) {
    const std::size_t extracted = c.tp + c.fp;
    const std::size_t truth = c.tp + c.fn;
    if (extracted == 0 && truth == 0) throw EmptyEvaluation();
    EvalMetrics m;
    m.precision = extracted == 0 ? 0.0 : static_cast<double>(c.tp) / static_cast<double>(extracted);
    m.recall = truth == 0 ? 0.0 : static_cast<double>(c.tp) / static_cast<double>(truth);
    const double sum = m.precision + m.recall;
    m.f1 = (extracted == 0 || truth == 0 || sum == 0.0) ? 0.0 : 2.0 * m.precision * m.recall / sum;
    return m;
}

AlignmentBreakdown alignment_breakdown(const std::vector<GroundedExtraction>& grounded,
                                       const std::set<TripleKey>& tp, const std::set<TripleKey>& fp) {
    std::map<TripleKey, AlignmentClass> weakest;
    for (const auto& g : grounded) {
        if (g.alignment == AlignmentClass::NoMatch) continue;
        const std::string subject = normalize_id(g.raw.text);
        for (const auto& [key, value] : g.raw.attributes) {
            const Predicate p = key == kNextKey ? Predicate::HasNext : Predicate::HasStakeholder;
            TripleKey t{subject, p, normalize_id(value)};
            auto [it, inserted] = weakest.try_emplace(std::move(t), g.alignment);
            if (!inserted) it->second = std::max(it->second, g.alignment);
        }
    }

    AlignmentBreakdown out;
    for (auto a : {AlignmentClass::MatchExact, AlignmentClass::MatchFuzzy, AlignmentClass::MatchLesser}) out.rows[a];
    auto row_for = [&](const TripleKey& t) -> AlignmentRow& {
        const auto it = weakest.find(t);
        return it == weakest.end() ? out.unattributed : out.rows[it->second];
    };
    for (const auto& t : tp) ++row_for(t).tp;
    for (const auto& t : fp) ++row_for(t).fp;
    return out;
}

EvalReport evaluate(const KnowledgeGraph& extracted, const KnowledgeGraph& truth,
                    const std::vector<GroundedExtraction>& grounded) {
    const TripleMatch m = match_triples(extracted, truth);
    EvalReport r;
    r.counts = m.counts();
    r.metrics = metrics(r.counts);
    r.per_alignment = alignment_breakdown(grounded, m.tp, m.fp);
    for (const auto& k : m.fp) r.fp_list.push_back({k, extracted.edges.at(k).provenance});
    for (const auto& k : m.fn) r.fn_list.push_back({k, truth.edges.at(k).provenance});
    return r;
}

std::string render_report(const EvalReport& r, ReportFormat format) {
    if (format == ReportFormat::Json) {
        json alignment = json::object();
        for (const auto& [cls, row] : r.per_alignment.rows) alignment[std::string(to_string(cls))] = {{"tp", row.tp}, {"fp", row.fp}};
        alignment["UNATTRIBUTED"] = {{"tp", r.per_alignment.unattributed.tp}, {"fp", r.per_alignment.unattributed.fp}};
        auto findings = [](const std::vector<TripleFinding>& list) {
            json arr = json::array();
            for (const auto& f : list) {
                json prov = json::array();
                for (const auto& p : f.provenance)
                    prov.push_back({{"doc", p.document_id}, {"start", p.interval.start}, {"end", p.interval.end}});
                arr.push_back({{"subject", f.key.subject}, {"predicate", to_string(f.key.predicate)},
                               {"object", f.key.object}, {"provenance", prov}});
            }
            return arr;
        };
        const json doc = {
            {"counts", {{"tp", r.counts.tp}, {"fp", r.counts.fp}, {"fn", r.counts.fn}}},
            {"metrics", {{"precision", r.metrics.precision}, {"recall", r.metrics.recall}, {"f1", r.metrics.f1}}},
            {"alignment", alignment},
            {"false_positives", findings(r.fp_list)},
            {"false_negatives", findings(r.fn_list)},
        };
        return doc.dump(2) + "\n";
    }

    std::ostringstream out;
    out << std::fixed << std::setprecision(3);
    out << "Performance metrics\n";
    out << "  " << std::left << std::setw(12) << "TP" << std::right << std::setw(8) << r.counts.tp << '\n';
    out << "  " << std::left << std::setw(12) << "FP" << std::right << std::setw(8) << r.counts.fp << '\n';
    out << "  " << std::left << std::setw(12) << "FN" << std::right << std::setw(8) << r.counts.fn << '\n';
    out << "  " << std::left << std::setw(12) << "Precision" << std::right << std::setw(8) << r.metrics.precision << '\n';
    out << "  " << std::left << std::setw(12) << "Recall" << std::right << std::setw(8) << r.metrics.recall << '\n';
    out << "  " << std::left << std::setw(12) << "F1 Score" << std::right << std::setw(8) << r.metrics.f1 << '\n';
    out << "\nProvenance by alignment class\n";
    out << "  " << std::left << std::setw(14) << "Class" << std::right << std::setw(8) << "FP" << std::setw(8) << "TP" << '\n';
    auto row = [&](std::string_view name, const AlignmentRow& row) {
        out << "  " << std::left << std::setw(14) << name << std::right << std::setw(8) << row.fp << std::setw(8) << row.tp << '\n';
    };
    for (auto a : {AlignmentClass::MatchExact, AlignmentClass::MatchFuzzy, AlignmentClass::MatchLesser}) {
        const auto it = r.per_alignment.rows.find(a);
        row(to_string(a), it == r.per_alignment.rows.end() ? AlignmentRow{} : it->second);
    }
    if (r.per_alignment.unattributed != AlignmentRow{}) row("UNATTRIBUTED", r.per_alignment.unattributed);

    out << "\nFalse positives (" << r.fp_list.size() << ")\n";
    for (const auto& f : r.fp_list) out << "  " << triple_text(f.key) << "  [" << provenance_text(f.provenance) << "]\n";
    out << "\nFalse negatives (" << r.fn_list.size() << ")\n";
    for (const auto& f : r.fn_list) {
        out << "  " << triple_text(f.key);
        if (!f.provenance.empty()) out << "  [" << provenance_text(f.provenance) << "]";
        out << '\n';
    }
    return out.str();
}

}  // namespace opsgraph
