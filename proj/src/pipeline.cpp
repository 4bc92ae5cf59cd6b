#include "opsgraph/pipeline.hpp"

#include <sstream>

#include "opsgraph/io.hpp"

namespace opsgraph {

namespace {

template <typename F>
auto stage(const char* name, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const StageError&) {
        throw;
    } catch (const std::exception& e) {
        throw StageError(name, e.what());
    }
}

}  // namespace

PipelineResult run_pipeline(const PipelineConfig& cfg, Backend* backend_override) {
    PipelineResult r;
    const SchemaSpec schema = SchemaSpec::full();

    r.document = stage("load", [&] {
        const std::string raw = io::read_file(cfg.input);
        return load_document(raw, cfg.page_marker, cfg.document_id.value_or(cfg.input.stem().string()));
    });
    r.chunks = segment(r.document, cfg.chunking);

    r.extraction = stage("extract", [&] {
        const auto shots = load_few_shot(cfg.few_shot, schema);
        std::unique_ptr<Backend> owned;
        Backend* backend = backend_override;
        if (backend == nullptr) {
            owned = make_backend(cfg.backend, schema);
            backend = owned.get();
        }
        return extract_corpus(r.chunks, r.document, *backend, cfg.backend, schema, shots);
    });

    r.grounded = stage("ground", [&] { return ground(r.extraction.extractions, r.document, r.chunks, cfg.grounding); });
    r.build = stage("build", [&] { return build_graph(r.grounded); });

    stage("validate", [&] {
        r.validation = validate_graph(r.build.graph);
        if (!r.validation.dangling.empty()) throw Error("graph has dangling references");
        if (r.validation.has_cycles()) {
            if (!cfg.break_cycles) {
                std::ostringstream msg;
                msg << "hasNext cycle(s) found; rerun with --break-cycles to remove them\n" << r.validation.to_text();
                throw Error(msg.str());
            }
            r.validation.broken_edges = break_cycles(r.build.graph);
        }
        return 0;
    });

    r.layout = stage("render", [&] { return layout(r.build.graph); });
    r.svg = render_svg(r.layout);

    if (cfg.truth) {
        r.evaluation = stage("eval", [&] {
            return evaluate(r.build.graph, deserialize(io::read_file(*cfg.truth)), r.grounded);
        });
    }
    return r;
}

std::string validation_text(const PipelineResult& r) {
    std::ostringstream out;
    out << r.validation.to_text();
    out << "extraction rejections: " << r.extraction.rejections.size() << '\n';
    for (const auto& rej : r.extraction.rejections)
        out << "  chunk " << rej.chunk_ordinal << " record " << rej.record_index << ": " << rej.reason << ": "
            << rej.record << '\n';
    out << "graph rejections: " << r.build.rejected.size() << '\n';
    for (const auto& rej : r.build.rejected) out << "  " << rej << '\n';
    std::size_t no_match = 0;
    for (const auto& g : r.grounded)
        if (g.alignment == AlignmentClass::NoMatch) ++no_match;
    out << "unanchored extractions: " << no_match << '\n';
    for (const auto& g : r.grounded)
        if (g.alignment == AlignmentClass::NoMatch)
            out << "  NO_MATCH " << to_string(g.raw.extraction_class) << " '" << g.raw.text << "' similarity "
                << g.similarity << '\n';
    return out.str();
}

PipelineResult run_pipeline_to_disk(const PipelineConfig& cfg, Backend* backend_override) {
    PipelineResult r = run_pipeline(cfg, backend_override);
    stage("write", [&] {
        const auto& dir = cfg.output_dir;
        std::filesystem::create_directories(dir);
        io::write_file_atomic(dir / "extractions.jsonl", write_extractions_jsonl(r.extraction.extractions));
        io::write_file_atomic(dir / "grounding.jsonl", write_grounding_jsonl(r.grounded));
        io::write_file_atomic(dir / "validation.txt", validation_text(r));
        io::write_file_atomic(dir / "kg.json", serialize(r.build.graph));
        io::write_file_atomic(dir / "swimlane.svg", r.svg);
        if (r.evaluation) {
            io::write_file_atomic(dir / "eval.txt", render_report(*r.evaluation, ReportFormat::Text));
            io::write_file_atomic(dir / "eval.json", render_report(*r.evaluation, ReportFormat::Json));
        }
        return 0;
    });
    return r;
}

}  // namespace opsgraph
