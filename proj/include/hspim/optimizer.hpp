#pragma once

#include <array>
#include <functional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "hspim/corpus.hpp"
#include "hspim/pipeline.hpp"
#include "hspim/questions.hpp"

namespace hspim {

struct GAConfig {
    int population_size = 10;     // P
    int iterations = 5;           // I
    double mutation_rate = 0.10;  // mu, per slot
    int elite_count = 0;          // 0 = max{1, floor(0.2 * P)}
    uint64_t seed = 0;
    size_t batch_size = 20;       // papers sampled per generation
    bool fixed_batch = false;     // reuse the first batch every generation
    int two_step_phase1_iterations = -1;  // -1 = iterations / 2

    int resolved_elite_count() const;
    void validate() const;
};

struct GenerationStat {
    int generation = 0;
    double best_fitness = 0.0;
    double mean_fitness = 0.0;
    Individual best;
};

struct GARunReport {
    std::vector<GenerationStat> generations;
    Individual best;
    double best_fitness = 0.0;
    uint64_t fitness_evaluations = 0;  // fitness calls actually made (memo misses)
    uint64_t llm_calls = 0;            // filled by callers holding the gateway

    std::string to_json() const;
    std::string fitness_trace_csv() const;
};

using Batch = std::vector<const Paper*>;

// Fitness is minimized. The batch argument carries the papers sampled for
// this evaluation; synthetic landscapes are free to ignore it.
using FitnessFn = std::function<double(const Individual&, const Batch&)>;

struct FitnessContext {
    const QuestionBank* bank = nullptr;
    Gateway* gateway = nullptr;
    PipelineConfig pipeline;
};

// RMSE between pipeline predictions and ground-truth labels over the batch.
double fitness(const Individual& individual, const Batch& papers, FitnessContext& ctx);
FitnessFn make_pipeline_fitness(FitnessContext& ctx);

// Each of the ten slots inherited from either parent with probability 1/2.
Individual crossover(const Individual& a, const Individual& b, std::mt19937_64& rng);

// Each slot independently resampled from its own question set with
// probability mu (the resample may pick the incumbent).
Individual mutate(const Individual& x, const QuestionBank& bank, double mu,
                  std::mt19937_64& rng);

GARunReport run_joint(const GAConfig& config, const QuestionBank& bank, const Batch& papers,
                      const FitnessFn& fitness_fn);

// Phase 1 searches the common slot with specific slots frozen at the base;
// phase 2 freezes the winning common question and searches the nine specific
// slots. The iteration budget splits per config.
GARunReport run_two_step(const GAConfig& config, const QuestionBank& bank, const Batch& papers,
                         const FitnessFn& fitness_fn);

struct PruningConfig {
    int subset_size = 3;  // s', in [1, 9]
};

struct PruneResult {
    std::set<SectionType> mask;
    double train_rmse = 0.0;
    size_t masks_evaluated = 0;
    std::vector<std::string> skipped;  // masks dropped because a paper lost all chunks
};

// All C(9, s') masks in lexicographic type order, each exactly once.
std::vector<std::set<SectionType>> enumerate_masks(int subset_size);

// Scores every paper once through ctx, then re-aggregates per candidate mask.
// Ties resolve to the lexicographically smallest mask.
PruneResult prune_sections(int subset_size, const Individual& individual, const Batch& papers,
                           FitnessContext& ctx);

struct SAConfig {
    uint64_t budget = 50;  // total fitness evaluations
    double initial_temperature = 1.0;
    double cooling = 0.9;  // geometric schedule T_k = T0 * cooling^k
    uint64_t seed = 0;
    size_t batch_size = 20;
    bool fixed_batch = false;
};

// Single-candidate baselines; both keep the best individual seen so far and
// start from the naive default combination.
GARunReport run_random_search(uint64_t budget, const QuestionBank& bank, const Batch& papers,
                              const FitnessFn& fitness_fn, uint64_t seed,
                              size_t batch_size = 20, bool fixed_batch = false);

GARunReport run_simulated_annealing(const SAConfig& config, const QuestionBank& bank,
                                    const Batch& papers, const FitnessFn& fitness_fn);

}  // namespace hspim
