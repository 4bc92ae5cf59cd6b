#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "opsgraph/corpus.hpp"
#include "opsgraph/error.hpp"
#include "opsgraph/evaluation.hpp"
#include "opsgraph/extraction.hpp"
#include "opsgraph/grounding.hpp"
#include "opsgraph/kgraph.hpp"
#include "opsgraph/swimlane.hpp"

namespace opsgraph {

/// A failure tagged with the stage that raised it.
class StageError : public Error {
public:
    StageError(std::string stage, const std::string& what)
        : Error(stage + ": " + what), stage_(std::move(stage)) {}
    const std::string& stage() const noexcept { return stage_; }

private:
    std::string stage_;
};

struct PipelineConfig {
    std::filesystem::path input;
    std::optional<std::string> document_id;  // defaults to the input file stem
    std::string page_marker{kDefaultPageMarker};
    ChunkingMode chunking = ChunkingMode::PageLevel;
    BackendConfig backend;
    std::filesystem::path few_shot;
    GroundingConfig grounding;
    std::filesystem::path output_dir;
    bool break_cycles = false;
    std::optional<std::filesystem::path> truth;  // also score against a curated graph
};

struct PipelineResult {
    Document document;
    std::vector<Chunk> chunks;
    ExtractionResult extraction;
    std::vector<GroundedExtraction> grounded;
    BuildResult build;
    ValidationReport validation;
    SwimlaneLayout layout;
    std::string svg;
    std::optional<EvalReport> evaluation;
};

/// load -> segment -> extract -> ground -> build -> validate -> layout,
/// entirely in memory. Throws StageError.
PipelineResult run_pipeline(const PipelineConfig& cfg, Backend* backend_override = nullptr);

/// Runs the pipeline and only then writes extractions.jsonl, grounding.jsonl,
/// kg.json, validation.txt and swimlane.svg (plus eval.txt/eval.json with a
/// truth graph). Nothing is written when any stage fails.
PipelineResult run_pipeline_to_disk(const PipelineConfig& cfg, Backend* backend_override = nullptr);

std::string validation_text(const PipelineResult& r);

}  // namespace opsgraph
