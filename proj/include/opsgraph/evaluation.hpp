#pragma once

#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "opsgraph/grounding.hpp"
#include "opsgraph/kgraph.hpp"

namespace opsgraph {

/// Triples are compared on normalized ids, exactly as the graph stores them.
using TripleKey = EdgeKey;

struct EvalCounts {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;

    bool operator==(const EvalCounts&) const = default;
};

struct EvalMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

struct TripleMatch {
    std::set<TripleKey> tp;
    std::set<TripleKey> fp;
    std::set<TripleKey> fn;

    EvalCounts counts() const { return {tp.size(), fp.size(), fn.size()}; }
};

TripleMatch match_triples(const KnowledgeGraph& extracted, const KnowledgeGraph& truth);

/// P = TP/(TP+FP), R = TP/(TP+FN), F1 = 2PR/(P+R), at full precision.
/// A zero denominator makes that metric 0 (and F1 0); both zero throws
/// EmptyEvaluation.
EvalMetrics metrics(const EvalCounts& c);

struct AlignmentRow {
    std::size_t tp = 0;
    std::size_t fp = 0;

    bool operator==(const AlignmentRow&) const = default;
};

struct AlignmentBreakdown {
    std::map<AlignmentClass, AlignmentRow> rows;  // EXACT, FUZZY, LESSER always present
    AlignmentRow unattributed;                    // triples no grounded extraction produced
};

/// Attributes every TP/FP triple to the weakest alignment class among the
/// grounded extractions that produced it.
AlignmentBreakdown alignment_breakdown(const std::vector<GroundedExtraction>& grounded,
                                       const std::set<TripleKey>& tp, const std::set<TripleKey>& fp);

struct TripleFinding {
    TripleKey key;
    std::vector<Provenance> provenance;
};

struct EvalReport {
    EvalCounts counts;
    EvalMetrics metrics;
    AlignmentBreakdown per_alignment;
    std::vector<TripleFinding> fp_list;
    std::vector<TripleFinding> fn_list;
};

EvalReport evaluate(const KnowledgeGraph& extracted, const KnowledgeGraph& truth,
                    const std::vector<GroundedExtraction>& grounded);

enum class ReportFormat { Text, Json };

std::string render_report(const EvalReport& r, ReportFormat format);

}  // namespace opsgraph
