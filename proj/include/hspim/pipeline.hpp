#pragma once

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "hspim/aggregator.hpp"
#include "hspim/corpus.hpp"
#include "hspim/gateway.hpp"
#include "hspim/questions.hpp"
#include "hspim/segmenter.hpp"

namespace hspim {

struct QAPair {
    std::string question;
    std::string answer;
};

struct PipelineConfig {
    bool use_qa = true;  // false = single-turn scoring (no QA augmentation)
    AggregationConfig aggregation;
    ClassifyMode classify_mode = ClassifyMode::lenient;
    double qa_temperature = 1.0;
    double score_temperature = 0.0;
    size_t chunk_char_budget = 6000;  // bodies beyond this are tail-truncated
    size_t classify_body_prefix = 1200;
    int jobs = 1;
    std::string model = "default";
};

struct ChunkRecord {
    SectionChunk chunk;
    std::optional<QAPair> qa;
    std::variant<ChunkScore, ChunkScorePlus> score;
};

struct PaperScore {
    std::string paper_id;
    double predicted = 0.0;
    std::vector<ChunkRecord> chunks;        // in chunk-index order
    std::vector<std::string> warnings;      // e.g. clamped scores
};

// JSON keys the scoring prompts request, in emission order.
const std::vector<std::string>& score_keys();
const std::vector<std::string>& score_keys_plus();

QAPair generate_qa(const SectionChunk& chunk, const std::string& question, Gateway& gateway,
                   double qa_temperature, size_t chunk_char_budget = 6000,
                   const std::string& model = "default");

ChunkScore score_chunk(const SectionChunk& chunk, const std::optional<QAPair>& qa,
                       Gateway& gateway, double score_temperature,
                       size_t chunk_char_budget = 6000, const std::string& model = "default",
                       std::vector<std::string>* warnings = nullptr);

ChunkScorePlus score_chunk_plus(const SectionChunk& chunk, const std::optional<QAPair>& qa,
                                Gateway& gateway, double score_temperature,
                                size_t chunk_char_budget = 6000,
                                const std::string& model = "default",
                                std::vector<std::string>* warnings = nullptr);

// QA + scoring over chunks that already carry section labels. Chunks whose
// type falls outside the section mask are skipped before any LLM work.
PaperScore score_classified_chunks(const Paper& paper, const std::vector<SectionChunk>& chunks,
                                   const Individual& individual, const QuestionBank& bank,
                                   Gateway& gateway, const PipelineConfig& config);

// The full path: segment -> classify -> (compose, QA)? -> score -> aggregate.
PaperScore score_paper(const Paper& paper, const Individual& individual,
                       const QuestionBank& bank, Gateway& gateway,
                       const PipelineConfig& config);

// Batch scoring, papers in parallel when config.jobs allows. Keyed by id.
std::map<std::string, PaperScore> score_papers(const std::vector<const Paper*>& papers,
                                               const Individual& individual,
                                               const QuestionBank& bank, Gateway& gateway,
                                               const PipelineConfig& config);

// Mask-then-compose over already-scored records; the record shape must match
// config.mode. This is what section pruning re-runs per candidate mask
// without further LLM calls.
double aggregate_records(const std::vector<ChunkRecord>& records,
                         const AggregationConfig& config);

// "hspim-scores-json" for one batch of papers.
std::string paper_scores_to_json(const std::vector<const PaperScore*>& scores,
                                 const PipelineConfig& config);

}  // namespace hspim
