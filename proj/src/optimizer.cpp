#include "hspim/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "hspim/errors.hpp"
#include "hspim/metrics.hpp"
#include "hspim/util.hpp"

namespace hspim {

using nlohmann::json;

int GAConfig::resolved_elite_count() const {
    if (elite_count > 0) return elite_count;
    return std::max(1, static_cast<int>(std::floor(0.2 * population_size)));
}

void GAConfig::validate() const {
    if (population_size < 1) throw UsageError("population_size must be >= 1");
    if (iterations < 1) throw UsageError("iterations must be >= 1");
    if (mutation_rate < 0.0 || mutation_rate > 1.0)
        throw UsageError("mutation_rate must lie in [0,1]");
    if (resolved_elite_count() > population_size)
        throw UsageError("elite_count must not exceed population_size");
    if (population_size > 1 && resolved_elite_count() >= population_size)
        throw UsageError("elite_count must be < population_size");
    if (batch_size < 1) throw UsageError("batch_size must be >= 1");
}

double fitness(const Individual& individual, const Batch& papers, FitnessContext& ctx) {
    if (!ctx.bank || !ctx.gateway) throw UsageError("fitness context is incomplete");
    if (papers.empty()) throw UsageError("fitness requires a non-empty batch");
    auto scores = score_papers(papers, individual, *ctx.bank, *ctx.gateway, ctx.pipeline);
    std::map<std::string, double> predictions, labels;
    for (const Paper* p : papers) {
        predictions[p->id] = scores.at(p->id).predicted;
        labels[p->id] = ground_truth(*p).innovation;
    }
    return evaluate(predictions, labels).rmse;
}

FitnessFn make_pipeline_fitness(FitnessContext& ctx) {
    return [&ctx](const Individual& individual, const Batch& batch) {
        return fitness(individual, batch, ctx);
    };
}

Individual crossover(const Individual& a, const Individual& b, std::mt19937_64& rng) {
    Individual child;
    child.common_index = (rng_below(rng, 2) == 0) ? a.common_index : b.common_index;
    for (size_t i = 0; i < kSectionTypeCount; ++i)
        child.specific_indices[i] =
            (rng_below(rng, 2) == 0) ? a.specific_indices[i] : b.specific_indices[i];
    return child;
}

Individual mutate(const Individual& x, const QuestionBank& bank, double mu,
                  std::mt19937_64& rng) {
    if (mu < 0.0 || mu > 1.0) throw UsageError("mutation rate must lie in [0,1]");
    Individual out = x;
    if (rng_unit(rng) < mu)
        out.common_index = static_cast<size_t>(rng_below(rng, bank.common.size()));
    for (SectionType t : all_section_types()) {
        if (rng_unit(rng) < mu)
            out.set_specific(t, static_cast<size_t>(rng_below(rng, bank.specific_size(t))));
    }
    return out;
}

namespace {

// Which genome slots a GA phase may touch; frozen slots snap back to the
// base individual after crossover and mutation.
struct SlotMask {
    bool common = true;
    std::array<bool, kSectionTypeCount> specific{};

    static SlotMask all() {
        SlotMask m;
        m.common = true;
        m.specific.fill(true);
        return m;
    }
    static SlotMask common_only() {
        SlotMask m;
        m.common = true;
        m.specific.fill(false);
        return m;
    }
    static SlotMask specific_only() {
        SlotMask m;
        m.common = false;
        m.specific.fill(true);
        return m;
    }
};

Individual apply_mask(Individual candidate, const Individual& base, const SlotMask& mask) {
    if (!mask.common) candidate.common_index = base.common_index;
    for (size_t i = 0; i < kSectionTypeCount; ++i)
        if (!mask.specific[i]) candidate.specific_indices[i] = base.specific_indices[i];
    return candidate;
}

std::mt19937_64 rng_for(uint64_t seed, const char* role, uint64_t a, uint64_t b = 0) {
    uint64_t h = fnv1a64(role, hash_mix(fnv1a64("hspim-ga"), seed));
    h = hash_mix(h, a);
    h = hash_mix(h, b);
    return std::mt19937_64(h);
}

Batch sample_batch(const Batch& papers, size_t batch_size, uint64_t seed, uint64_t generation,
                   bool fixed_batch) {
    if (papers.empty()) return {};
    if (papers.size() <= batch_size) return papers;
    uint64_t g = fixed_batch ? 0 : generation;
    std::vector<size_t> idx(papers.size());
    std::iota(idx.begin(), idx.end(), 0);
    auto rng = rng_for(seed, "batch", g);
    deterministic_shuffle(idx, rng);
    Batch batch;
    batch.reserve(batch_size);
    for (size_t k = 0; k < batch_size; ++k) batch.push_back(papers[idx[k]]);
    return batch;
}

uint64_t batch_key(const Batch& batch) {
    uint64_t h = fnv1a64("batch");
    for (const Paper* p : batch) h = fnv1a64(p->id, h);
    return h;
}

// Memoizes fitness per (batch, individual); a previously evaluated pair
// costs nothing, mirroring the gateway response cache one level up.
class FitnessEvaluator {
public:
    FitnessEvaluator(const FitnessFn& fn) : fn_(fn) {}

    double operator()(const Individual& ind, const Batch& batch) {
        uint64_t key = hash_mix(batch_key(batch), ind.key());
        auto it = memo_.find(key);
        if (it != memo_.end()) return it->second;
        double value = fn_(ind, batch);
        ++evaluations_;
        memo_.emplace(key, value);
        return value;
    }

    uint64_t evaluations() const { return evaluations_; }

private:
    const FitnessFn& fn_;
    std::map<uint64_t, double> memo_;
    uint64_t evaluations_ = 0;
};

struct RankedIndividual {
    Individual individual;
    double fitness = 0.0;
    uint64_t tie_break = 0;  // keeps equal-fitness genotypes competitive
};

GARunReport run_ga_masked(const GAConfig& config, const QuestionBank& bank,
                          const Batch& papers, const SlotMask& mask,
                          const Individual& base, int iterations, int generation_offset,
                          FitnessEvaluator& evaluator, GARunReport report) {
    bank.validate();
    base.validate(bank);
    const int pop_size = config.population_size;
    const int elites = std::min(config.resolved_elite_count(), pop_size);

    // population: the base combination plus P-1 random points of the subspace
    std::vector<Individual> population;
    population.reserve(static_cast<size_t>(pop_size));
    population.push_back(base);
    for (int i = 1; i < pop_size; ++i) {
        auto rng = rng_for(config.seed, "init", static_cast<uint64_t>(generation_offset),
                           static_cast<uint64_t>(i));
        population.push_back(apply_mask(random_individual(bank, rng), base, mask));
    }

    for (int g = 0; g < iterations; ++g) {
        const int generation = generation_offset + g;
        Batch batch = sample_batch(papers, config.batch_size, config.seed,
                                   static_cast<uint64_t>(generation), config.fixed_batch);

        std::vector<RankedIndividual> ranked(population.size());
        for (size_t i = 0; i < population.size(); ++i) {
            uint64_t tie = hash_mix(hash_mix(config.seed, static_cast<uint64_t>(generation)),
                                    population[i].key());
            ranked[i] = {population[i], evaluator(population[i], batch), tie};
        }
        // fitness ties resolve by seeded genotype hash, not insertion order;
        // stable ties would hand every elite slot back to incumbent clones
        std::stable_sort(ranked.begin(), ranked.end(),
                         [](const RankedIndividual& x, const RankedIndividual& y) {
                             if (x.fitness != y.fitness) return x.fitness < y.fitness;
                             return x.tie_break < y.tie_break;
                         });

        GenerationStat stat;
        stat.generation = generation;
        stat.best_fitness = ranked.front().fitness;
        stat.best = ranked.front().individual;
        double sum = 0.0;
        for (const auto& r : ranked) sum += r.fitness;
        stat.mean_fitness = sum / static_cast<double>(ranked.size());
        report.generations.push_back(stat);
        report.best = ranked.front().individual;
        report.best_fitness = ranked.front().fitness;

        if (g + 1 == iterations) break;

        // elites verbatim, offspring from uniform parents in the top half
        std::vector<Individual> next;
        next.reserve(population.size());
        for (int e = 0; e < elites && e < static_cast<int>(ranked.size()); ++e)
            next.push_back(ranked[static_cast<size_t>(e)].individual);
        size_t parent_pool = std::max<size_t>(1, (ranked.size() + 1) / 2);
        size_t slot = 0;
        while (next.size() < population.size()) {
            auto rng = rng_for(config.seed, "offspring", static_cast<uint64_t>(generation),
                               slot++);
            const Individual& pa =
                ranked[static_cast<size_t>(rng_below(rng, parent_pool))].individual;
            const Individual& pb =
                ranked[static_cast<size_t>(rng_below(rng, parent_pool))].individual;
            Individual child = crossover(pa, pb, rng);
            child = mutate(child, bank, config.mutation_rate, rng);
            next.push_back(apply_mask(child, base, mask));
        }
        population = std::move(next);
    }

    report.fitness_evaluations = evaluator.evaluations();
    return report;
}

}  // namespace

GARunReport run_joint(const GAConfig& config, const QuestionBank& bank, const Batch& papers,
                      const FitnessFn& fitness_fn) {
    config.validate();
    FitnessEvaluator evaluator(fitness_fn);
    return run_ga_masked(config, bank, papers, SlotMask::all(), Individual::defaults(),
                         config.iterations, 0, evaluator, GARunReport{});
}

GARunReport run_two_step(const GAConfig& config, const QuestionBank& bank, const Batch& papers,
                         const FitnessFn& fitness_fn) {
    config.validate();
    int phase1 = config.two_step_phase1_iterations >= 0 ? config.two_step_phase1_iterations
                                                        : config.iterations / 2;
    if (phase1 > config.iterations)
        throw UsageError("two-step phase 1 budget exceeds total iterations");
    int phase2 = config.iterations - phase1;

    FitnessEvaluator evaluator(fitness_fn);
    GARunReport report;
    Individual base = Individual::defaults();
    if (phase1 > 0) {
        report = run_ga_masked(config, bank, papers, SlotMask::common_only(), base, phase1,
                               0, evaluator, std::move(report));
        base.common_index = report.best.common_index;  // specific slots stay at defaults
    }
    if (phase2 > 0) {
        report = run_ga_masked(config, bank, papers, SlotMask::specific_only(), base, phase2,
                               phase1, evaluator, std::move(report));
    }
    report.fitness_evaluations = evaluator.evaluations();
    return report;
}

std::vector<std::set<SectionType>> enumerate_masks(int subset_size) {
    if (subset_size < 1 || subset_size > static_cast<int>(kSectionTypeCount))
        throw UsageError("subset size must lie in [1, 9]");
    std::vector<std::set<SectionType>> masks;
    const auto types = all_section_types();
    std::vector<int> pick(static_cast<size_t>(subset_size));
    std::iota(pick.begin(), pick.end(), 0);
    while (true) {
        std::set<SectionType> mask;
        for (int i : pick) mask.insert(types[static_cast<size_t>(i)]);
        masks.push_back(std::move(mask));
        // advance the combination lexicographically
        int k = subset_size - 1;
        while (k >= 0 &&
               pick[static_cast<size_t>(k)] ==
                   static_cast<int>(kSectionTypeCount) - subset_size + k)
            --k;
        if (k < 0) break;
        ++pick[static_cast<size_t>(k)];
        for (int j = k + 1; j < subset_size; ++j)
            pick[static_cast<size_t>(j)] = pick[static_cast<size_t>(j - 1)] + 1;
    }
    return masks;
}

PruneResult prune_sections(int subset_size, const Individual& individual, const Batch& papers,
                           FitnessContext& ctx) {
    if (!ctx.bank || !ctx.gateway) throw UsageError("fitness context is incomplete");
    if (papers.empty()) throw UsageError("prune_sections requires papers");

    // one full scoring pass; every candidate mask reuses these records
    PipelineConfig full = ctx.pipeline;
    full.aggregation.section_mask.reset();
    auto scores = score_papers(papers, individual, *ctx.bank, *ctx.gateway, full);

    std::vector<double> labels;
    for (const Paper* p : papers) labels.push_back(ground_truth(*p).innovation);

    PruneResult result;
    bool have_best = false;
    for (const auto& mask : enumerate_masks(subset_size)) {
        ++result.masks_evaluated;
        double se = 0.0;
        bool starved = false;
        for (size_t i = 0; i < papers.size(); ++i) {
            const PaperScore& ps = scores.at(papers[i]->id);
            std::vector<ChunkRecord> kept;
            for (const auto& rec : ps.chunks)
                if (mask.count(rec.chunk.section_type)) kept.push_back(rec);
            if (kept.empty()) {
                starved = true;
                break;
            }
            AggregationConfig agg = ctx.pipeline.aggregation;
            agg.section_mask = mask;
            double predicted = aggregate_records(kept, agg);
            se += (predicted - labels[i]) * (predicted - labels[i]);
        }
        if (starved) {
            std::string names;
            for (SectionType t : mask) {
                if (!names.empty()) names += "+";
                names += section_type_name(t);
            }
            result.skipped.push_back(names);
            continue;
        }
        double rmse = std::sqrt(se / static_cast<double>(papers.size()));
        if (!have_best || rmse < result.train_rmse) {
            result.train_rmse = rmse;
            result.mask = mask;
            have_best = true;
        }
    }
    if (!have_best)
        throw PipelineError("every candidate mask left some paper without chunks");
    return result;
}

GARunReport run_random_search(uint64_t budget, const QuestionBank& bank, const Batch& papers,
                              const FitnessFn& fitness_fn, uint64_t seed, size_t batch_size,
                              bool fixed_batch) {
    if (budget < 1) throw UsageError("random search budget must be >= 1");
    bank.validate();
    GARunReport report;
    FitnessEvaluator evaluator(fitness_fn);
    bool have_best = false;
    for (uint64_t iter = 0; iter < budget; ++iter) {
        Individual candidate;
        if (iter == 0) {
            candidate = Individual::defaults();
        } else {
            auto rng = rng_for(seed, "rs", iter);
            candidate = random_individual(bank, rng);
        }
        Batch batch = sample_batch(papers, batch_size, seed, iter, fixed_batch);
        double f = evaluator(candidate, batch);
        if (!have_best || f < report.best_fitness) {
            report.best = candidate;
            report.best_fitness = f;
            have_best = true;
        }
        report.generations.push_back({static_cast<int>(iter), report.best_fitness, f,
                                      report.best});
    }
    report.fitness_evaluations = evaluator.evaluations();
    return report;
}

GARunReport run_simulated_annealing(const SAConfig& config, const QuestionBank& bank,
                                    const Batch& papers, const FitnessFn& fitness_fn) {
    if (config.budget < 1) throw UsageError("annealing budget must be >= 1");
    if (config.cooling <= 0.0 || config.cooling > 1.0)
        throw UsageError("cooling factor must lie in (0,1]");
    bank.validate();

    GARunReport report;
    FitnessEvaluator evaluator(fitness_fn);
    Individual current = Individual::defaults();
    Batch batch = sample_batch(papers, config.batch_size, config.seed, 0, config.fixed_batch);
    double current_fitness = evaluator(current, batch);
    report.best = current;
    report.best_fitness = current_fitness;
    report.generations.push_back({0, report.best_fitness, current_fitness, report.best});

    for (uint64_t iter = 1; iter < config.budget; ++iter) {
        auto rng = rng_for(config.seed, "sa", iter);
        // neighbor: resample exactly one of the ten slots
        Individual neighbor = current;
        uint64_t slot = rng_below(rng, kSectionTypeCount + 1);
        if (slot == kSectionTypeCount) {
            neighbor.common_index = static_cast<size_t>(rng_below(rng, bank.common.size()));
        } else {
            SectionType t = all_section_types()[slot];
            neighbor.set_specific(t, static_cast<size_t>(rng_below(rng, bank.specific_size(t))));
        }
        batch = sample_batch(papers, config.batch_size, config.seed, iter, config.fixed_batch);
        // current keeps its last fitness; one evaluation per iteration
        double neighbor_fitness = evaluator(neighbor, batch);
        double delta = neighbor_fitness - current_fitness;
        double temperature =
            config.initial_temperature * std::pow(config.cooling, static_cast<double>(iter - 1));
        bool accept = delta <= 0.0;
        if (!accept && temperature > 0.0)
            accept = rng_unit(rng) < std::exp(-delta / temperature);
        if (accept) {
            current = neighbor;
            current_fitness = neighbor_fitness;
        }
        if (neighbor_fitness < report.best_fitness) {
            report.best = neighbor;
            report.best_fitness = neighbor_fitness;
        }
        report.generations.push_back({static_cast<int>(iter), report.best_fitness,
                                      neighbor_fitness, report.best});
    }
    report.fitness_evaluations = evaluator.evaluations();
    return report;
}

std::string GARunReport::to_json() const {
    json root;
    json gens = json::array();
    for (const auto& g : generations) {
        gens.push_back({{"generation", g.generation},
                        {"best_fitness", g.best_fitness},
                        {"mean_fitness", g.mean_fitness},
                        {"best_individual", json::parse(g.best.to_json())}});
    }
    root["generations"] = std::move(gens);
    root["final_best"] = json::parse(best.to_json());
    root["best_fitness"] = best_fitness;
    root["fitness_evaluations"] = fitness_evaluations;
    root["llm_calls"] = llm_calls;
    return root.dump(2);
}

std::string GARunReport::fitness_trace_csv() const {
    std::ostringstream out;
    out << "generation,best_fitness,mean_fitness\n";
    for (const auto& g : generations)
        out << g.generation << ',' << g.best_fitness << ',' << g.mean_fitness << '\n';
    return out.str();
}

}  // namespace hspim
