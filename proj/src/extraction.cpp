#include "opsgraph/extraction.hpp"

#include <atomic>
#include <cctype>
#include <regex>
#include <sstream>
#include <thread>

#include <httplib.h>

#include "opsgraph/error.hpp"
#include "opsgraph/io.hpp"

namespace opsgraph {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Schema

SchemaSpec SchemaSpec::full() {
    return {{std::begin(kAllClasses), std::end(kAllClasses)},
            {std::begin(kAllPredicates), std::end(kAllPredicates)}};
}

void SchemaSpec::validate() const {
    if (classes.empty()) throw ConfigError("schema declares no classes");
    if (predicates.empty()) throw ConfigError("schema declares no predicates");
    const bool has_sequencable = licenses(EntityClass::Procedure) || licenses(EntityClass::SequencedItem);
    if (predicates.contains(Predicate::HasNext) && !has_sequencable)
        throw ConfigError("hasNext requires a Procedure or Sequenced_Item class");
    if (predicates.contains(Predicate::HasStakeholder) && (!has_sequencable || !licenses(EntityClass::Stakeholder)))
        throw ConfigError("hasStakeholder requires a sequencable class and the Stakeholder class");
}

bool SchemaSpec::licenses_attribute(std::string_view key) const {
    if (key == kStakeholderKey) return predicates.contains(Predicate::HasStakeholder);
    if (key == kNextKey) return predicates.contains(Predicate::HasNext);
    return false;
}

void BackendConfig::validate() const {
    if (max_workers < 1) throw ConfigError("max_workers must be >= 1");
    if (max_attempts < 1) throw ConfigError("max_attempts must be >= 1");
    if (kind == BackendKind::Http && (!endpoint || endpoint->empty() || !model_name || model_name->empty()))
        throw ConfigError("http backend requires an endpoint and a model name");
}

// ---------------------------------------------------------------------------
// Records

json to_json(const RawExtraction& e, bool with_chunk) {
    json j;
    j["class"] = to_string(e.extraction_class);
    j["text"] = e.text;
    j["attributes"] = e.attributes;
    if (with_chunk) j["chunk"] = e.chunk_ordinal;
    return j;
}

namespace {

/// Returns an empty string when `j` is a valid record, else the reason.
std::string check_record(const json& j, const SchemaSpec& schema, RawExtraction& out) {
    if (!j.is_object()) return "record is not an object";
    const json* cls = nullptr;
    const json* text = nullptr;
    for (const char* key : {"class", "extraction_class"})
        if (j.contains(key)) cls = &j.at(key);
    for (const char* key : {"text", "extraction_text"})
        if (j.contains(key)) text = &j.at(key);
    if (cls == nullptr || !cls->is_string()) return "missing string field 'class'";
    if (text == nullptr || !text->is_string()) return "missing string field 'text'";

    const auto parsed = parse_entity_class(cls->get<std::string>());
    if (!parsed || !schema.licenses(*parsed)) return "class '" + cls->get<std::string>() + "' not in schema";
    out.extraction_class = *parsed;
    out.text = text->get<std::string>();
    if (out.text.empty()) return "empty text";

    out.attributes.clear();
    if (j.contains("attributes") && !j.at("attributes").is_null()) {
        const json& attrs = j.at("attributes");
        if (!attrs.is_object()) return "attributes is not an object";
        for (const auto& [key, value] : attrs.items()) {
            if (!schema.licenses_attribute(key)) return "attribute '" + key + "' not in schema";
            if (!value.is_string()) return "attribute '" + key + "' is not a string";
            out.attributes.emplace(key, value.get<std::string>());
        }
    }
    return {};
}

}  // namespace

RawExtraction raw_extraction_from_json(const json& j, const SchemaSpec& schema, int chunk_ordinal) {
    RawExtraction e;
    if (auto why = check_record(j, schema, e); !why.empty()) throw SchemaViolation("extraction record", why);
    e.chunk_ordinal = j.contains("chunk") && j.at("chunk").is_number_integer() ? j.at("chunk").get<int>() : chunk_ordinal;
    return e;
}

std::string records_to_json(const std::vector<RawExtraction>& records) {
    json arr = json::array();
    for (const auto& r : records) arr.push_back(to_json(r, false));
    return arr.dump();
}

ParseResult parse_structured_output(std::string_view raw, const SchemaSpec& schema, int chunk_ordinal) {
    json body;
    try {
        body = json::parse(raw);
    } catch (const json::parse_error& e) {
        throw MalformedOutput(e.what(), std::string(raw));
    }
    if (!body.is_array()) throw MalformedOutput("expected a JSON array of records", std::string(raw));

    ParseResult result;
    int index = 0;
    for (const auto& record : body) {
        RawExtraction e;
        if (auto why = check_record(record, schema, e); why.empty()) {
            e.chunk_ordinal = chunk_ordinal;
            result.extractions.push_back(std::move(e));
        } else {
            result.rejections.push_back({chunk_ordinal, index, std::move(why), record.dump()});
        }
        ++index;
    }
    return result;
}

// ---------------------------------------------------------------------------
// Prompting

json PromptPayload::to_json() const {
    json shots = json::array();
    for (const auto& ex : exemplars) shots.push_back({{"input", ex.input}, {"output", ex.output}});
    return {{"instruction", instruction}, {"examples", shots}, {"text", chunk_text}};
}

PromptPayload build_prompt(const SchemaSpec& schema, const std::vector<FewShotExample>& shots,
                           std::string_view chunk_text) {
    if (shots.empty()) throw MissingExemplars();
    if (chunk_text.empty()) throw ConfigError("chunk text is empty");

    std::ostringstream ins;
    ins << "Extract airport operational knowledge from the text as a JSON array of records "
           "{\"class\", \"text\", \"attributes\"}.\n";
    ins << "Allowed classes:";
    for (auto c : schema.classes) ins << ' ' << to_string(c);
    ins << "\nAllowed relations:";
    for (auto p : schema.predicates) ins << ' ' << to_string(p);
    ins << '\n';
    if (schema.predicates.contains(Predicate::HasStakeholder))
        ins << "Express hasStakeholder as attribute \"" << kStakeholderKey
            << "\" naming the responsible stakeholder.\n";
    if (schema.predicates.contains(Predicate::HasNext))
        ins << "Express hasNext as attribute \"" << kNextKey << "\" naming the item that follows.\n";
    ins << "Do not use any class or relation outside these lists. "
           "Copy \"text\" verbatim from the source; do not paraphrase or overlap entities.";

    PromptPayload payload;
    payload.instruction = ins.str();
    for (const auto& shot : shots)
        payload.exemplars.push_back({shot.source_snippet, records_to_json(shot.expected_extractions)});
    payload.chunk_text = std::string(chunk_text);
    return payload;
}

// ---------------------------------------------------------------------------
// Mock backend

std::string mock_backend(std::string_view chunk_text, const SchemaSpec& schema) {
    static const std::regex performed(R"(^(.+?)\s+is\s+performed\s+by\s+(.+?)\.$)");
    static const std::regex after(R"(^After\s+(.+?),\s+(.+?)\s+begins\.$)");

    std::vector<RawExtraction> out;
    std::size_t pos = 0;
    const std::string text(chunk_text);
    while (pos < text.size()) {
        std::size_t stop = pos;
        while (stop < text.size() && text[stop] != '\n' &&
               !(text[stop] == '.' && (stop + 1 == text.size() || std::isspace(static_cast<unsigned char>(text[stop + 1])))))
            ++stop;
        if (stop == text.size()) break;  // trailing fragment without a full stop
        if (text[stop] == '\n') {      // headings and other unterminated lines
            pos = stop + 1;
            continue;
        }
        std::size_t begin = pos;
        while (begin < stop && std::isspace(static_cast<unsigned char>(text[begin]))) ++begin;
        const std::string sentence = text.substr(begin, stop + 1 - begin);
        pos = stop + 1;

        std::smatch m;
        if (std::regex_match(sentence, m, performed)) {
            if (schema.licenses(EntityClass::Procedure)) {
                RawExtraction proc{EntityClass::Procedure, m[1].str(), {}, 0};
                if (schema.licenses_attribute(kStakeholderKey)) proc.attributes.emplace(kStakeholderKey, m[2].str());
                out.push_back(std::move(proc));
            }
            if (schema.licenses(EntityClass::Stakeholder))
                out.push_back({EntityClass::Stakeholder, m[2].str(), {}, 0});
        } else if (std::regex_match(sentence, m, after)) {
            if (schema.licenses(EntityClass::SequencedItem) && schema.licenses_attribute(kNextKey))
                out.push_back({EntityClass::SequencedItem, m[1].str(), {{std::string(kNextKey), m[2].str()}}, 0});
        }
    }
    return records_to_json(out);
}

std::string MockBackend::complete(const PromptPayload& prompt) { return mock_backend(prompt.chunk_text, schema_); }

// ---------------------------------------------------------------------------
// HTTP backend

HttpBackend::HttpBackend(BackendConfig config) : config_(std::move(config)) {
    config_.validate();
    static const std::regex url(R"(^(https?://[^/]+)(/.*)?$)");
    std::smatch m;
    if (!std::regex_match(*config_.endpoint, m, url)) throw ConfigError("bad endpoint URL: " + *config_.endpoint);
    origin_ = m[1].str();
    path_ = m[2].matched ? m[2].str() : "/";
}

std::string HttpBackend::complete(const PromptPayload& prompt) {
    httplib::Client client(origin_);
    const auto timeout = static_cast<time_t>(config_.request_timeout.count());
    client.set_connection_timeout(timeout, 0);
    client.set_read_timeout(timeout, 0);
    const json request = {{"model", *config_.model_name}, {"prompt", prompt.to_json()}};
    auto res = client.Post(path_, request.dump(), "application/json");
    if (!res) throw Error("transport error: " + httplib::to_string(res.error()));
    if (res->status != 200) throw Error("HTTP status " + std::to_string(res->status));
    return res->body;
}

std::unique_ptr<Backend> make_backend(const BackendConfig& config, const SchemaSpec& schema) {
    config.validate();
    if (config.kind == BackendKind::Http) return std::make_unique<HttpBackend>(config);
    return std::make_unique<MockBackend>(schema);
}

// ---------------------------------------------------------------------------
// Orchestration

ExtractionResult extract_corpus(const std::vector<Chunk>& chunks, const Document& doc, Backend& backend,
                                const BackendConfig& config, const SchemaSpec& schema,
                                const std::vector<FewShotExample>& shots) {
    config.validate();
    if (shots.empty()) throw MissingExemplars();

    struct Slot {
        std::optional<ParseResult> parsed;
        std::string failure;
        int attempts = 0;
    };
    std::vector<Slot> slots(chunks.size());
    std::atomic<std::size_t> next{0};
    std::atomic<bool> aborted{false};

    auto work = [&] {
        for (;;) {
            if (aborted.load()) return;
            const std::size_t i = next.fetch_add(1);
            if (i >= chunks.size()) return;
            const Chunk& chunk = chunks[i];
            const PromptPayload prompt = build_prompt(schema, shots, chunk_text(doc, chunk));
            Slot& slot = slots[i];
            for (int attempt = 1; attempt <= config.max_attempts; ++attempt) {
                slot.attempts = attempt;
                try {
                    slot.parsed = parse_structured_output(backend.complete(prompt), schema, chunk.ordinal);
                    break;
                } catch (const std::exception& e) {
                    slot.failure = e.what();
                    if (attempt < config.max_attempts)
                        std::this_thread::sleep_for(config.backoff_base * (1 << (attempt - 1)));
                }
            }
            if (!slot.parsed) aborted.store(true);
        }
    };

    const auto workers = std::min<std::size_t>(static_cast<std::size_t>(config.max_workers), chunks.size());
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    }

    ExtractionResult result;
    for (std::size_t i = 0; i < chunks.size(); ++i) {
        Slot& slot = slots[i];
        if (slot.attempts > 0 && !slot.parsed)
            throw BackendError(chunks[i].ordinal, slot.attempts, slot.failure);
    }
    for (auto& slot : slots) {
        if (!slot.parsed) continue;  // unreachable unless aborted, handled above
        for (auto& e : slot.parsed->extractions) result.extractions.push_back(std::move(e));
        for (auto& r : slot.parsed->rejections) result.rejections.push_back(std::move(r));
    }
    return result;
}

// ---------------------------------------------------------------------------
// Fixtures and JSONL

std::vector<FewShotExample> parse_few_shot(std::string_view json_text, const SchemaSpec& schema) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw SchemaViolation("few-shot fixture", e.what());
    }
    if (!doc.is_object() || !doc.contains("examples") || !doc["examples"].is_array())
        throw SchemaViolation("few-shot fixture", "expected an object with an 'examples' array");

    std::vector<FewShotExample> shots;
    for (std::size_t i = 0; i < doc["examples"].size(); ++i) {
        const json& ex = doc["examples"][i];
        const std::string where = "examples[" + std::to_string(i) + "]";
        if (!ex.contains("text") || !ex["text"].is_string()) throw SchemaViolation(where, "missing 'text'");
        if (!ex.contains("extractions") || !ex["extractions"].is_array())
            throw SchemaViolation(where, "missing 'extractions'");
        FewShotExample shot{ex["text"].get<std::string>(), {}};
        for (std::size_t k = 0; k < ex["extractions"].size(); ++k) {
            const std::string rec_where = where + ".extractions[" + std::to_string(k) + "]";
            RawExtraction e;
            if (auto why = check_record(ex["extractions"][k], schema, e); !why.empty())
                throw SchemaViolation(rec_where, why);
            if (shot.source_snippet.find(e.text) == std::string::npos)
                throw SchemaViolation(rec_where, "text '" + e.text + "' does not occur in the snippet");
            shot.expected_extractions.push_back(std::move(e));
        }
        shots.push_back(std::move(shot));
    }
    return shots;
}

std::vector<FewShotExample> load_few_shot(const std::filesystem::path& path, const SchemaSpec& schema) {
    return parse_few_shot(io::read_file(path), schema);
}

std::string write_extractions_jsonl(const std::vector<RawExtraction>& extractions) {
    std::string out;
    for (const auto& e : extractions) {
        out += to_json(e).dump();
        out += '\n';
    }
    return out;
}

std::vector<RawExtraction> read_extractions_jsonl(std::string_view text, const SchemaSpec& schema) {
    std::vector<RawExtraction> out;
    std::istringstream in{std::string(text)};
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            out.push_back(raw_extraction_from_json(json::parse(line), schema, 0));
        } catch (const json::parse_error& e) {
            throw SchemaViolation("line " + std::to_string(lineno), e.what());
        } catch (const SchemaViolation& e) {
            throw SchemaViolation("line " + std::to_string(lineno), e.what());
        }
    }
    return out;
}

}  // namespace opsgraph
