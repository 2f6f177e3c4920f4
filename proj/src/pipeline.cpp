#include "hspim/pipeline.hpp"

#include <algorithm>

#include <json.hpp>

#include "hspim/errors.hpp"
#include "hspim/prompts.hpp"
#include "hspim/util.hpp"

namespace hspim {

using nlohmann::json;

const std::vector<std::string>& score_keys() {
    static const std::vector<std::string> keys = {"novelty_score", "reason",
                                                  "confidence_score"};
    return keys;
}

const std::vector<std::string>& score_keys_plus() {
    static const std::vector<std::string> keys = {
        "novelty_score",      "contribution_score",      "feasibility_score",
        "novelty_confidence", "contribution_confidence", "feasibility_confidence",
        "reason"};
    return keys;
}

namespace {

std::string truncate_body(const std::string& body, size_t budget) {
    if (body.size() <= budget) return body;
    return body.substr(0, budget) + "…";
}

std::string chunk_context(const SectionChunk& chunk) {
    return "paper " + chunk.paper_id + " chunk " + std::to_string(chunk.index);
}

double clamp_score(double value, const std::string& key, const SectionChunk& chunk,
                   std::vector<std::string>* warnings) {
    if (value >= 1.0 && value <= 5.0) return value;
    double clamped = std::clamp(value, 1.0, 5.0);
    if (warnings)
        warnings->push_back(chunk_context(chunk) + ": " + key + " " +
                            std::to_string(value) + " clamped to " +
                            std::to_string(clamped));
    return clamped;
}

double require_real(const json& obj, const std::string& key) {
    const json& v = obj.at(key);
    if (v.is_number()) return v.get<double>();
    // complete_json already coerced numeric strings
    throw JsonContractError("key \"" + key + "\" is not numeric");
}

std::string reason_text(const json& obj) {
    const json& v = obj.at("reason");
    return v.is_string() ? v.get<std::string>() : v.dump();
}

}  // namespace

QAPair generate_qa(const SectionChunk& chunk, const std::string& question, Gateway& gateway,
                   double qa_temperature, size_t chunk_char_budget,
                   const std::string& model) {
    if (trim(question).empty())
        throw UsageError("generate_qa: empty question for " + chunk_context(chunk));
    CompletionRequest request;
    request.model = model;
    request.system = prompts::qa_system();
    request.user = prompts::qa_user(question, truncate_body(chunk.body, chunk_char_budget));
    request.temperature = qa_temperature;
    request.max_output = 1024;
    try {
        CompletionResponse resp = gateway.complete(request);
        return QAPair{question, resp.text};
    } catch (const GatewayError& e) {
        throw PipelineError(chunk_context(chunk) + ": QA generation failed: " + e.what());
    }
}

namespace {

json score_json(const SectionChunk& chunk, const std::optional<QAPair>& qa, Gateway& gateway,
                double score_temperature, size_t chunk_char_budget, const std::string& model,
                const std::vector<std::string>& keys) {
    CompletionRequest request;
    request.model = model;
    request.system = prompts::scoring_system();
    std::optional<std::pair<std::string, std::string>> qa_pair;
    if (qa) qa_pair = std::make_pair(qa->question, qa->answer);
    request.user = prompts::scoring_user(chunk.section_type,
                                         truncate_body(chunk.body, chunk_char_budget),
                                         qa_pair, keys);
    request.temperature = score_temperature;
    request.max_output = 512;
    request.json_schema_hint = "object";
    try {
        return gateway.complete_json(request, keys);
    } catch (const GatewayError& e) {
        throw PipelineError(chunk_context(chunk) + ": scoring failed: " + e.what());
    }
}

}  // namespace

ChunkScore score_chunk(const SectionChunk& chunk, const std::optional<QAPair>& qa,
                       Gateway& gateway, double score_temperature, size_t chunk_char_budget,
                       const std::string& model, std::vector<std::string>* warnings) {
    if (trim(chunk.body).empty())
        throw PipelineError(chunk_context(chunk) + ": empty chunk body");
    json obj = score_json(chunk, qa, gateway, score_temperature, chunk_char_budget, model,
                          score_keys());
    ChunkScore score;
    score.novelty = clamp_score(require_real(obj, "novelty_score"), "novelty_score", chunk,
                                warnings);
    score.confidence = clamp_score(require_real(obj, "confidence_score"), "confidence_score",
                                   chunk, warnings);
    score.reason = reason_text(obj);
    return score;
}

ChunkScorePlus score_chunk_plus(const SectionChunk& chunk, const std::optional<QAPair>& qa,
                                Gateway& gateway, double score_temperature,
                                size_t chunk_char_budget, const std::string& model,
                                std::vector<std::string>* warnings) {
    if (trim(chunk.body).empty())
        throw PipelineError(chunk_context(chunk) + ": empty chunk body");
    json obj = score_json(chunk, qa, gateway, score_temperature, chunk_char_budget, model,
                          score_keys_plus());
    ChunkScorePlus score;
    score.novelty = clamp_score(require_real(obj, "novelty_score"), "novelty_score", chunk,
                                warnings);
    score.contribution = clamp_score(require_real(obj, "contribution_score"),
                                     "contribution_score", chunk, warnings);
    score.feasibility = clamp_score(require_real(obj, "feasibility_score"),
                                    "feasibility_score", chunk, warnings);
    score.conf_novelty = clamp_score(require_real(obj, "novelty_confidence"),
                                     "novelty_confidence", chunk, warnings);
    score.conf_contribution = clamp_score(require_real(obj, "contribution_confidence"),
                                          "contribution_confidence", chunk, warnings);
    score.conf_feasibility = clamp_score(require_real(obj, "feasibility_confidence"),
                                         "feasibility_confidence", chunk, warnings);
    score.reason = reason_text(obj);
    return score;
}

PaperScore score_classified_chunks(const Paper& paper, const std::vector<SectionChunk>& chunks,
                                   const Individual& individual, const QuestionBank& bank,
                                   Gateway& gateway, const PipelineConfig& config) {
    config.aggregation.validate();
    individual.validate(bank);

    // pruning happens before any QA or scoring call
    std::vector<const SectionChunk*> selected;
    for (const auto& c : chunks) {
        if (config.aggregation.section_mask &&
            config.aggregation.section_mask->count(c.section_type) == 0)
            continue;
        selected.push_back(&c);
    }
    if (selected.empty())
        throw PipelineError("paper " + paper.id + ": no surviving chunks after section mask");

    bool plus = config.aggregation.mode == ScoreMode::hspim_plus;
    std::vector<ChunkRecord> records(selected.size());
    std::vector<std::vector<std::string>> warnings(selected.size());

    parallel_for(config.jobs, selected.size(), [&](size_t i) {
        const SectionChunk& chunk = *selected[i];
        ChunkRecord rec;
        rec.chunk = chunk;
        if (config.use_qa) {
            std::string question =
                chunk.section_type == SectionType::Unmatched
                    ? compose_common_only(individual, bank)
                    : compose(individual, chunk.section_type, bank);
            rec.qa = generate_qa(chunk, question, gateway, config.qa_temperature,
                                 config.chunk_char_budget, config.model);
        }
        if (plus)
            rec.score = score_chunk_plus(chunk, rec.qa, gateway, config.score_temperature,
                                         config.chunk_char_budget, config.model, &warnings[i]);
        else
            rec.score = score_chunk(chunk, rec.qa, gateway, config.score_temperature,
                                    config.chunk_char_budget, config.model, &warnings[i]);
        records[i] = std::move(rec);
    });

    PaperScore result;
    result.paper_id = paper.id;
    result.chunks = std::move(records);
    for (auto& w : warnings)
        result.warnings.insert(result.warnings.end(), w.begin(), w.end());

    // The mask already filtered, so aggregate over everything that remains.
    AggregationConfig agg = config.aggregation;
    agg.section_mask.reset();
    try {
        if (plus) {
            std::vector<ScoredChunkPlus> scored;
            for (const auto& r : result.chunks)
                scored.push_back({r.chunk.section_type, std::get<ChunkScorePlus>(r.score)});
            result.predicted = aggregate(scored, agg);
        } else {
            std::vector<ScoredChunk> scored;
            for (const auto& r : result.chunks)
                scored.push_back({r.chunk.section_type, std::get<ChunkScore>(r.score)});
            result.predicted = aggregate(scored, agg);
        }
    } catch (const AggregationError& e) {
        throw PipelineError("paper " + paper.id + ": aggregation failed: " + e.what());
    }
    return result;
}

PaperScore score_paper(const Paper& paper, const Individual& individual,
                       const QuestionBank& bank, Gateway& gateway,
                       const PipelineConfig& config) {
    auto chunks = segment(paper);
    ClassifyOptions copt;
    copt.mode = config.classify_mode;
    copt.body_prefix_chars = config.classify_body_prefix;
    copt.jobs = config.jobs;
    chunks = classify(std::move(chunks), gateway, copt);
    return score_classified_chunks(paper, chunks, individual, bank, gateway, config);
}

std::map<std::string, PaperScore> score_papers(const std::vector<const Paper*>& papers,
                                               const Individual& individual,
                                               const QuestionBank& bank, Gateway& gateway,
                                               const PipelineConfig& config) {
    std::vector<PaperScore> scores(papers.size());
    // parallelism goes to the paper loop; chunks inside stay serial so the
    // worker count stays bounded by jobs
    PipelineConfig inner = config;
    if (papers.size() > 1) inner.jobs = 1;
    parallel_for(config.jobs, papers.size(), [&](size_t i) {
        scores[i] = score_paper(*papers[i], individual, bank, gateway, inner);
    });
    std::map<std::string, PaperScore> out;
    for (auto& s : scores) out[s.paper_id] = std::move(s);
    return out;
}

double aggregate_records(const std::vector<ChunkRecord>& records,
                         const AggregationConfig& config) {
    if (records.empty()) throw AggregationError("no records to aggregate");
    bool plus = config.mode == ScoreMode::hspim_plus;
    for (const auto& r : records) {
        if (plus != std::holds_alternative<ChunkScorePlus>(r.score))
            throw AggregationError("record shape does not match aggregation mode");
    }
    if (plus) {
        std::vector<ScoredChunkPlus> scored;
        for (const auto& r : records)
            scored.push_back({r.chunk.section_type, std::get<ChunkScorePlus>(r.score)});
        return aggregate(scored, config);
    }
    std::vector<ScoredChunk> scored;
    for (const auto& r : records)
        scored.push_back({r.chunk.section_type, std::get<ChunkScore>(r.score)});
    return aggregate(scored, config);
}

std::string paper_scores_to_json(const std::vector<const PaperScore*>& scores,
                                 const PipelineConfig& config) {
    json root;
    root["mode"] = config.use_qa ? "hspim" : "sspim";
    root["aggregation"] =
        config.aggregation.mode == ScoreMode::hspim_plus ? "hspim_plus" : "hspim";
    if (config.aggregation.mode == ScoreMode::hspim_plus)
        root["norm"] = norm_name(config.aggregation.norm);
    json papers = json::array();
    for (const PaperScore* ps : scores) {
        json pnode;
        pnode["paper_id"] = ps->paper_id;
        pnode["predicted"] = ps->predicted;
        json chunks = json::array();
        for (const auto& rec : ps->chunks) {
            json cnode;
            cnode["index"] = rec.chunk.index;
            cnode["section_type"] = section_type_name(rec.chunk.section_type);
            if (rec.qa)
                cnode["qa"] = {{"question", rec.qa->question}, {"answer", rec.qa->answer}};
            else
                cnode["qa"] = nullptr;
            if (std::holds_alternative<ChunkScore>(rec.score)) {
                const auto& s = std::get<ChunkScore>(rec.score);
                cnode["novelty_score"] = s.novelty;
                cnode["confidence_score"] = s.confidence;
                cnode["reason"] = s.reason;
            } else {
                const auto& s = std::get<ChunkScorePlus>(rec.score);
                cnode["novelty_score"] = s.novelty;
                cnode["contribution_score"] = s.contribution;
                cnode["feasibility_score"] = s.feasibility;
                cnode["novelty_confidence"] = s.conf_novelty;
                cnode["contribution_confidence"] = s.conf_contribution;
                cnode["feasibility_confidence"] = s.conf_feasibility;
                cnode["reason"] = s.reason;
            }
            chunks.push_back(std::move(cnode));
        }
        pnode["chunks"] = std::move(chunks);
        json warn = json::array();
        for (const auto& w : ps->warnings) warn.push_back(w);
        pnode["warnings"] = std::move(warn);
        papers.push_back(std::move(pnode));
    }
    root["papers"] = std::move(papers);
    return root.dump(2);
}

}  // namespace hspim
