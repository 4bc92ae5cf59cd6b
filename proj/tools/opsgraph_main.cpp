// Command-line front end for the extraction -> grounding -> graph -> swimlane
// -> evaluation pipeline.

#include <CLI11.hpp>
#include <json.hpp>

#include <iostream>

#include "opsgraph/io.hpp"
#include "opsgraph/pipeline.hpp"

#ifndef OPSGRAPH_DATA_DIR
#define OPSGRAPH_DATA_DIR "data"
#endif

namespace fs = std::filesystem;
using namespace opsgraph;

namespace {

struct Options {
    std::string config_file;
    bool verbose = false;

    std::string input;
    std::string output;
    std::string doc_id;
    std::string page_marker{kDefaultPageMarker};
    std::string chunking = "page";
    std::string backend = "mock";
    std::string endpoint;
    std::string model;
    int max_workers = 1;
    std::string few_shot = std::string(OPSGRAPH_DATA_DIR) + "/fewshot.json";
    double fuzzy_threshold = 0.75;
    double lesser_threshold = 0.35;
    bool break_cycles = false;
    std::string truth;

    std::string extractions;
    std::string grounding;
    std::string kg;
    std::string extracted;
    std::string format;
};

void add_corpus_flags(CLI::App* app, Options& o) {
    app->add_option("--input", o.input, "Plain-text (UTF-8) source document")->required();
    app->add_option("--doc-id", o.doc_id, "Document id used in provenance (default: file stem)");
    app->add_option("--page-marker", o.page_marker, "Page boundary marker (default: form feed)");
    app->add_option("--chunking", o.chunking, "Context window modality")->check(CLI::IsMember({"page", "document"}));
}

void add_backend_flags(CLI::App* app, Options& o) {
    app->add_option("--backend", o.backend, "Extraction backend")->check(CLI::IsMember({"mock", "http"}));
    app->add_option("--endpoint", o.endpoint, "Structured-generation endpoint URL (http backend)");
    app->add_option("--model", o.model, "Model name sent to the endpoint (http backend)");
    app->add_option("--max-workers", o.max_workers, "Concurrent chunk requests")->check(CLI::PositiveNumber);
    app->add_option("--fewshot", o.few_shot, "Few-shot exemplar fixture (JSON)");
}

void add_grounding_flags(CLI::App* app, Options& o) {
    app->add_option("--fuzzy-threshold", o.fuzzy_threshold, "Minimum similarity for MATCH_FUZZY");
    app->add_option("--lesser-threshold", o.lesser_threshold, "Minimum similarity for MATCH_LESSER");
}

/// Fills options the user did not pass on the command line from a JSON
/// object whose keys are long flag names without the leading dashes.
void apply_config(CLI::App& leaf, const std::string& path) {
    const auto doc = nlohmann::json::parse(io::read_file(path));
    if (!doc.is_object()) throw ConfigError("config file must hold a JSON object");
    for (const auto& [key, value] : doc.items()) {
        CLI::Option* opt = nullptr;
        for (CLI::App* app = &leaf; app != nullptr && opt == nullptr; app = app->get_parent())
            opt = app->get_option_no_throw("--" + key);
        if (opt == nullptr || opt->count() > 0) continue;
        std::string text;
        if (value.is_string()) text = value.get<std::string>();
        else if (value.is_boolean()) text = value.get<bool>() ? "true" : "false";
        else text = value.dump();
        opt->add_result(text);
        opt->run_callback();
    }
}

BackendConfig backend_config(const Options& o) {
    BackendConfig cfg;
    cfg.kind = o.backend == "http" ? BackendKind::Http : BackendKind::Mock;
    if (!o.endpoint.empty()) cfg.endpoint = o.endpoint;
    if (!o.model.empty()) cfg.model_name = o.model;
    cfg.max_workers = o.max_workers;
    return cfg;
}

GroundingConfig grounding_config(const Options& o) {
    GroundingConfig cfg;
    cfg.fuzzy_threshold = o.fuzzy_threshold;
    cfg.lesser_threshold = o.lesser_threshold;
    cfg.validate();
    return cfg;
}

Document load_input(const Options& o) {
    return load_document(io::read_file(o.input), o.page_marker,
                         o.doc_id.empty() ? fs::path(o.input).stem().string() : o.doc_id);
}

void emit(const std::string& out_path, const std::string& contents) {
    if (out_path.empty() || out_path == "-") std::cout << contents;
    else io::write_file_atomic(out_path, contents);
}

int cmd_pipeline(const Options& o) {
    PipelineConfig cfg;
    cfg.input = o.input;
    if (!o.doc_id.empty()) cfg.document_id = o.doc_id;
    cfg.page_marker = o.page_marker;
    cfg.chunking = parse_chunking_mode(o.chunking);
    cfg.backend = backend_config(o);
    cfg.few_shot = o.few_shot;
    cfg.grounding = grounding_config(o);
    cfg.output_dir = o.output;
    cfg.break_cycles = o.break_cycles;
    if (!o.truth.empty()) cfg.truth = o.truth;

    const PipelineResult r = run_pipeline_to_disk(cfg);
    if (o.verbose) {
        std::cerr << "chunks: " << r.chunks.size() << ", extractions: " << r.extraction.extractions.size()
                  << ", entities: " << r.build.graph.entities.size() << ", edges: " << r.build.graph.edges.size()
                  << '\n';
    }
    if (r.evaluation) std::cout << render_report(*r.evaluation, ReportFormat::Text);
    return 0;
}

int cmd_extract(const Options& o) {
    const SchemaSpec schema = SchemaSpec::full();
    const Document doc = load_input(o);
    const auto chunks = segment(doc, parse_chunking_mode(o.chunking));
    const BackendConfig cfg = backend_config(o);
    auto backend = make_backend(cfg, schema);
    const auto result = extract_corpus(chunks, doc, *backend, cfg, schema, load_few_shot(o.few_shot, schema));
    for (const auto& rej : result.rejections)
        std::cerr << "rejected: chunk " << rej.chunk_ordinal << " record " << rej.record_index << ": " << rej.reason << '\n';
    emit(o.output, write_extractions_jsonl(result.extractions));
    return 0;
}

int cmd_ground(const Options& o) {
    const SchemaSpec schema = SchemaSpec::full();
    const Document doc = load_input(o);
    const auto chunks = segment(doc, parse_chunking_mode(o.chunking));
    const auto extractions = read_extractions_jsonl(io::read_file(o.extractions), schema);
    emit(o.output, write_grounding_jsonl(ground(extractions, doc, chunks, grounding_config(o))));
    return 0;
}

int cmd_kg_build(const Options& o) {
    const auto grounded = read_grounding_jsonl(io::read_file(o.grounding), SchemaSpec::full());
    const BuildResult built = build_graph(grounded);
    for (const auto& why : built.rejected) std::cerr << "rejected: " << why << '\n';
    emit(o.output, serialize(built.graph));
    return 0;
}

int cmd_kg_validate(const Options& o) {
    KnowledgeGraph g = deserialize(io::read_file(o.kg));
    ValidationReport report = validate_graph(g);
    if (o.break_cycles) report.broken_edges = break_cycles(g);
    emit(o.output, report.to_text());
    return 0;
}

int cmd_kg_export(const Options& o) {
    const KnowledgeGraph g = deserialize(io::read_file(o.kg));
    emit(o.output, o.format == "triples" ? export_triples(g) : serialize(g));
    return 0;
}

int cmd_swimlane(const Options& o) {
    KnowledgeGraph g = deserialize(io::read_file(o.kg));
    ValidationReport report = validate_graph(g);
    if (report.has_cycles()) {
        if (!o.break_cycles) {
            std::cerr << "error: render: hasNext cycle(s) found; rerun with --break-cycles to remove them\n"
                      << report.to_text();
            return 1;
        }
        report.broken_edges = break_cycles(g);
        std::cerr << report.to_text();
    }
    if (o.output.empty()) throw ConfigError("--out is required");
    io::write_file_atomic(o.output, render_svg(layout(g)));
    return 0;
}

int cmd_eval(const Options& o) {
    const KnowledgeGraph extracted = deserialize(io::read_file(o.extracted));
    const KnowledgeGraph truth = deserialize(io::read_file(o.truth));
    const auto grounded = read_grounding_jsonl(io::read_file(o.grounding), SchemaSpec::full());
    const auto report = evaluate(extracted, truth, grounded);
    emit(o.output, render_report(report, o.format == "json" ? ReportFormat::Json : ReportFormat::Text));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"opsgraph: source-grounded knowledge graphs and swimlanes from operational documents"};
    app.require_subcommand(1);
    Options o;
    app.add_option("--config", o.config_file, "JSON file supplying defaults for any long flag");
    app.add_flag("--verbose", o.verbose, "Print stage summaries to stderr");
    app.fallthrough();

    auto* pipeline = app.add_subcommand("pipeline", "Run every stage and write all artifacts");
    add_corpus_flags(pipeline, o);
    add_backend_flags(pipeline, o);
    add_grounding_flags(pipeline, o);
    pipeline->add_option("--out", o.output, "Output directory")->required();
    pipeline->add_flag("--break-cycles", o.break_cycles, "Remove hasNext cycle edges instead of failing");
    pipeline->add_option("--truth", o.truth, "Optional ground-truth KG; also writes eval.txt/eval.json");

    auto* extract = app.add_subcommand("extract", "Extract raw records (JSON Lines)");
    add_corpus_flags(extract, o);
    add_backend_flags(extract, o);
    extract->add_option("--out", o.output, "Output file (default: stdout)");

    auto* ground_cmd = app.add_subcommand("ground", "Anchor extractions to source intervals (JSON Lines)");
    add_corpus_flags(ground_cmd, o);
    add_grounding_flags(ground_cmd, o);
    ground_cmd->add_option("--extractions", o.extractions, "extractions.jsonl")->required();
    ground_cmd->add_option("--out", o.output, "Output file (default: stdout)");

    auto* kg = app.add_subcommand("kg", "Knowledge graph operations");
    kg->require_subcommand(1);
    auto* kg_build = kg->add_subcommand("build", "Build a KG from grounding.jsonl");
    kg_build->add_option("--grounding", o.grounding, "grounding.jsonl")->required();
    kg_build->add_option("--out", o.output, "Output file (default: stdout)");
    auto* kg_validate = kg->add_subcommand("validate", "Report cycles, unassigned steps and dangling edges");
    kg_validate->add_option("--kg", o.kg, "KG file")->required();
    kg_validate->add_flag("--break-cycles", o.break_cycles, "Also list the edges that would be removed");
    kg_validate->add_option("--out", o.output, "Output file (default: stdout)");
    auto* kg_export = kg->add_subcommand("export", "Export a KG");
    kg_export->add_option("--kg", o.kg, "KG file")->required();
    kg_export->add_option("--format", o.format, "json|triples")->check(CLI::IsMember({"json", "triples"}))->default_str("json");
    kg_export->add_option("--out", o.output, "Output file (default: stdout)");

    auto* swimlane = app.add_subcommand("swimlane", "Swimlane diagrams");
    swimlane->require_subcommand(1);
    auto* render = swimlane->add_subcommand("render", "Render a KG as an SVG swimlane");
    render->add_option("--kg", o.kg, "KG file")->required();
    render->add_option("--out", o.output, "SVG output file")->required();
    render->add_flag("--break-cycles", o.break_cycles, "Remove hasNext cycle edges instead of failing");

    auto* eval = app.add_subcommand("eval", "Score an extracted KG against a curated one");
    eval->add_option("--extracted", o.extracted, "Extracted KG")->required();
    eval->add_option("--truth", o.truth, "Ground-truth KG")->required();
    eval->add_option("--grounding", o.grounding, "grounding.jsonl of the extracted run")->required();
    eval->add_option("--format", o.format, "text|json")->check(CLI::IsMember({"text", "json"}));
    eval->add_option("--out", o.output, "Output file (default: stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    const char* stage = "cli";
    try {
        CLI::App* leaf = &app;
        while (!leaf->get_subcommands().empty()) leaf = leaf->get_subcommands().front();
        if (!o.config_file.empty()) apply_config(*leaf, o.config_file);

        if (pipeline->parsed()) return cmd_pipeline(o);
        if (extract->parsed()) return (stage = "extract", cmd_extract(o));
        if (ground_cmd->parsed()) return (stage = "ground", cmd_ground(o));
        if (kg_build->parsed()) return (stage = "kg build", cmd_kg_build(o));
        if (kg_validate->parsed()) return (stage = "kg validate", cmd_kg_validate(o));
        if (kg_export->parsed()) return (stage = "kg export", cmd_kg_export(o));
        if (render->parsed()) return (stage = "render", cmd_swimlane(o));
        if (eval->parsed()) return (stage = "eval", cmd_eval(o));
    } catch (const StageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << stage << ": " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << stage << ": " << e.what() << '\n';
        return 1;
    }
    return 2;
}
