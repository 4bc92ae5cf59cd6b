#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "opsgraph/corpus.hpp"
#include "opsgraph/schema.hpp"

namespace opsgraph {

/// The closed vocabulary the backend is allowed to answer in.
struct SchemaSpec {
    std::set<EntityClass> classes;
    std::set<Predicate> predicates;

    static SchemaSpec full();

    /// Throws ConfigError when a set is empty or a predicate needs an
    /// undeclared class.
    void validate() const;
    bool licenses(EntityClass c) const { return classes.contains(c); }
    bool licenses_attribute(std::string_view key) const;
};

struct RawExtraction {
    EntityClass extraction_class = EntityClass::Procedure;
    std::string text;
    std::map<std::string, std::string> attributes;  // keys: stakeholder, next
    int chunk_ordinal = 0;

    bool operator==(const RawExtraction&) const = default;
};

struct FewShotExample {
    std::string source_snippet;
    std::vector<RawExtraction> expected_extractions;
};

/// A backend record that was dropped from the result, with the reason.
struct Rejection {
    int chunk_ordinal = 0;
    int record_index = 0;
    std::string reason;
    std::string record;

    bool operator==(const Rejection&) const = default;
};

struct ParseResult {
    std::vector<RawExtraction> extractions;
    std::vector<Rejection> rejections;
};

struct PromptPayload {
    struct Exemplar {
        std::string input;
        std::string output;  // JSON record array
    };

    std::string instruction;
    std::vector<Exemplar> exemplars;
    std::string chunk_text;

    nlohmann::json to_json() const;
};

enum class BackendKind { Mock, Http };

struct BackendConfig {
    BackendKind kind = BackendKind::Mock;
    std::optional<std::string> endpoint;
    std::optional<std::string> model_name;
    int max_workers = 1;
    int max_attempts = 3;
    std::chrono::milliseconds backoff_base{200};
    std::chrono::seconds request_timeout{60};

    void validate() const;
};

/// Anything that turns a prompt into a structured-output body. Must be safe
/// to call from several workers at once.
class Backend {
public:
    virtual ~Backend() = default;
    virtual std::string complete(const PromptPayload& prompt) = 0;
};

class MockBackend final : public Backend {
public:
    explicit MockBackend(SchemaSpec schema) : schema_(std::move(schema)) {}
    std::string complete(const PromptPayload& prompt) override;

private:
    SchemaSpec schema_;
};

/// POSTs {"model": ..., "prompt": ...} to a generic structured-generation
/// endpoint and returns the response body.
class HttpBackend final : public Backend {
public:
    explicit HttpBackend(BackendConfig config);
    std::string complete(const PromptPayload& prompt) override;

private:
    BackendConfig config_;
    std::string origin_;
    std::string path_;
};

std::unique_ptr<Backend> make_backend(const BackendConfig& config, const SchemaSpec& schema);

PromptPayload build_prompt(const SchemaSpec& schema, const std::vector<FewShotExample>& shots,
                           std::string_view chunk_text);

/// Well-formed records become extractions; bad records are quarantined in
/// the rejection list. Throws MalformedOutput when the body is not a JSON
/// record array.
ParseResult parse_structured_output(std::string_view raw, const SchemaSpec& schema, int chunk_ordinal);

/// Deterministic rule-based stand-in for a model. Recognizes
/// "X is performed by Y." and "After X, Y begins." within a single line.
std::string mock_backend(std::string_view chunk_text, const SchemaSpec& schema);

struct ExtractionResult {
    std::vector<RawExtraction> extractions;
    std::vector<Rejection> rejections;
};

/// Runs every chunk through the backend with at most config.max_workers
/// requests in flight. Output order is (chunk ordinal, record order)
/// regardless of completion order. Throws BackendError for the lowest
/// failed ordinal once retries are exhausted.
ExtractionResult extract_corpus(const std::vector<Chunk>& chunks, const Document& doc, Backend& backend,
                                const BackendConfig& config, const SchemaSpec& schema,
                                const std::vector<FewShotExample>& shots);

nlohmann::json to_json(const RawExtraction& e, bool with_chunk = true);
RawExtraction raw_extraction_from_json(const nlohmann::json& j, const SchemaSpec& schema, int chunk_ordinal);
std::string records_to_json(const std::vector<RawExtraction>& records);

/// Few-shot fixture: {"version": 1, "examples": [{"text": ..., "extractions": [...]}]}.
std::vector<FewShotExample> parse_few_shot(std::string_view json_text, const SchemaSpec& schema);
std::vector<FewShotExample> load_few_shot(const std::filesystem::path& path, const SchemaSpec& schema);

std::string write_extractions_jsonl(const std::vector<RawExtraction>& extractions);
std::vector<RawExtraction> read_extractions_jsonl(std::string_view text, const SchemaSpec& schema);

}  // namespace opsgraph
