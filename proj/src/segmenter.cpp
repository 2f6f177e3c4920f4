#include "hspim/segmenter.hpp"

#include <random>

#include <json.hpp>

#include "hspim/errors.hpp"
#include "hspim/gateway.hpp"
#include "hspim/prompts.hpp"
#include "hspim/util.hpp"

namespace hspim {

using nlohmann::json;

std::vector<SectionChunk> segment(const Paper& paper) {
    if (paper.raw_sections.empty())
        throw PipelineError("paper " + paper.id + ": no raw sections to segment");
    std::vector<SectionChunk> chunks;
    for (const auto& section : paper.raw_sections) {
        if (trim(section.body).empty()) continue;
        SectionChunk c;
        c.paper_id = paper.id;
        c.index = chunks.size();
        c.heading = section.heading;
        c.body = section.body;
        chunks.push_back(std::move(c));
    }
    if (chunks.empty())
        throw PipelineError("paper " + paper.id + ": every section body is empty");
    return chunks;
}

namespace {

SectionType classify_one(const SectionChunk& chunk, Gateway& gateway,
                         const ClassifyOptions& options) {
    bool lenient = options.mode == ClassifyMode::lenient;
    std::string body_prefix = chunk.body.substr(
        0, std::min(options.body_prefix_chars, chunk.body.size()));
    CompletionRequest request;
    request.system = prompts::classification_system();
    request.user = prompts::classification_user(chunk.heading, body_prefix, lenient);
    request.temperature = 0.0;
    request.max_output = 16;

    auto parse = [&](const std::string& text) -> std::optional<SectionType> {
        auto t = section_type_from_label(trim(text));
        if (t && *t == SectionType::Unmatched && !lenient) return std::nullopt;
        return t;
    };

    std::string reply;
    try {
        reply = gateway.complete(request).text;
    } catch (const GatewayError& e) {
        throw PipelineError("paper " + chunk.paper_id + " chunk " +
                            std::to_string(chunk.index) + ": classification failed: " +
                            e.what());
    }
    if (auto t = parse(reply)) return *t;

    // one reprompt with a harder instruction, then the mode's fallback
    CompletionRequest retry = request;
    retry.user += "\nYour previous reply was not one of the allowed labels. "
                  "Reply with exactly one label from the list and nothing else.";
    try {
        reply = gateway.complete(retry).text;
    } catch (const GatewayError& e) {
        throw PipelineError("paper " + chunk.paper_id + " chunk " +
                            std::to_string(chunk.index) + ": classification failed: " +
                            e.what());
    }
    if (auto t = parse(reply)) return *t;
    if (lenient) return SectionType::Unmatched;
    throw PipelineError("paper " + chunk.paper_id + " chunk " +
                        std::to_string(chunk.index) +
                        ": unparseable section label after reprompt: \"" +
                        trim(reply).substr(0, 80) + "\"");
}

}  // namespace

std::vector<SectionChunk> classify(std::vector<SectionChunk> chunks, Gateway& gateway,
                                   const ClassifyOptions& options) {
    std::vector<SectionType> labels(chunks.size(), SectionType::Unmatched);
    parallel_for(options.jobs, chunks.size(), [&](size_t i) {
        labels[i] = classify_one(chunks[i], gateway, options);
    });
    for (size_t i = 0; i < chunks.size(); ++i) {
        chunks[i].section_type = labels[i];
        chunks[i].classified = true;
    }
    return chunks;
}

std::vector<SectionChunk> relabel_fraction_unmatched(std::vector<SectionChunk> chunks,
                                                     double fraction, uint64_t seed) {
    if (fraction < 0.0 || fraction > 1.0)
        throw UsageError("noise fraction must lie in [0,1]");
    std::mt19937_64 rng(seed);
    for (auto& chunk : chunks) {
        if (rng_unit(rng) < fraction) chunk.section_type = SectionType::Unmatched;
    }
    return chunks;
}

std::string chunks_to_json(const std::vector<SectionChunk>& chunks) {
    json arr = json::array();
    for (const auto& c : chunks) {
        arr.push_back({{"paper_id", c.paper_id},
                       {"index", c.index},
                       {"heading", c.heading},
                       {"body", c.body},
                       {"section_type", section_type_name(c.section_type)}});
    }
    return arr.dump(2);
}

std::vector<SectionChunk> chunks_from_json(const std::string& text) {
    json arr;
    try {
        arr = json::parse(text);
    } catch (const json::exception& e) {
        throw CorpusError(std::string("malformed chunks JSON: ") + e.what());
    }
    if (!arr.is_array()) throw CorpusError("chunks JSON must be an array");
    std::vector<SectionChunk> out;
    for (const auto& node : arr) {
        SectionChunk c;
        c.paper_id = node.at("paper_id").get<std::string>();
        c.index = node.at("index").get<size_t>();
        c.heading = node.value("heading", std::string());
        c.body = node.at("body").get<std::string>();
        auto t = section_type_from_label(node.at("section_type").get<std::string>());
        if (!t) throw CorpusError("unknown section_type in chunks JSON");
        c.section_type = *t;
        c.classified = true;
        out.push_back(std::move(c));
    }
    return out;
}

}  // namespace hspim
