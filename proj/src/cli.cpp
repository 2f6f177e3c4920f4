#include "hspim/cli.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "hspim/corpus.hpp"
#include "hspim/errors.hpp"
#include "hspim/gateway.hpp"
#include "hspim/metrics.hpp"
#include "hspim/optimizer.hpp"
#include "hspim/pipeline.hpp"
#include "hspim/questions.hpp"

#ifndef HSPIM_DEFAULT_BANK
#define HSPIM_DEFAULT_BANK "data/default_bank.json"
#endif

namespace hspim {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct ProviderFlags {
    std::string provider = "mock";
    std::string endpoint;
    std::string model = "default";
    std::string credentials_env = "HSPIM_API_KEY";
    std::string cache_dir;
    int concurrency = 4;
    uint64_t mock_seed = 0x48535049;

    void attach(CLI::App* cmd) {
        cmd->add_option("--provider", provider, "LLM provider: mock or http")
            ->check(CLI::IsMember({"mock", "http"}))
            ->capture_default_str();
        cmd->add_option("--endpoint", endpoint, "Chat-completions endpoint for --provider http");
        cmd->add_option("--model", model, "Model id sent to the provider")
            ->capture_default_str();
        cmd->add_option("--credentials-env", credentials_env,
                        "Environment variable holding the API key")
            ->capture_default_str();
        cmd->add_option("--cache-dir", cache_dir, "Directory for the response cache");
        cmd->add_option("--concurrency", concurrency, "Provider concurrency limit")
            ->capture_default_str();
        cmd->add_option("--mock-seed", mock_seed, "Seed of the deterministic mock provider")
            ->capture_default_str();
    }

    ProviderConfig to_config() const {
        ProviderConfig cfg;
        if (provider == "mock") {
            cfg.kind = ProviderKind::mock;
        } else {
            cfg.kind = ProviderKind::http_openai_compatible;
            cfg.endpoint = endpoint;
        }
        cfg.credentials_env = credentials_env;
        cfg.concurrency_limit = concurrency;
        cfg.cache_dir = cache_dir;
        cfg.mock_seed = mock_seed;
        return cfg;
    }
};

struct PipelineFlags {
    std::string mode = "hspim_naive";
    bool plus = false;
    std::string norm = "l1";
    std::string mask_csv;
    bool no_confidence_weights = false;
    bool strict_classify = false;
    double qa_temperature = 1.0;
    double score_temperature = 0.0;
    size_t chunk_char_budget = 6000;
    int jobs = 1;
    std::string bank_path = HSPIM_DEFAULT_BANK;
    std::string individual_path;

    void attach(CLI::App* cmd, bool with_mode) {
        if (with_mode)
            cmd->add_option("--mode", mode, "sspim, hspim_naive, or hspim")
                ->check(CLI::IsMember({"sspim", "hspim_naive", "hspim"}))
                ->capture_default_str();
        cmd->add_flag("--plus", plus,
                      "Score novelty, contribution, and feasibility (p-norm composite)");
        cmd->add_option("--norm", norm, "Aggregation norm for --plus: l1, l2, linf")
            ->check(CLI::IsMember({"l1", "l2", "linf"}))
            ->capture_default_str();
        cmd->add_option("--mask", mask_csv,
                        "Comma-separated section types to keep (e.g. Abstract,Conclusion)");
        cmd->add_flag("--no-confidence-weights", no_confidence_weights,
                      "Aggregate with plain means instead of confidence weights");
        cmd->add_flag("--strict-classify", strict_classify,
                      "Force every chunk onto one of the nine types");
        cmd->add_option("--qa-temperature", qa_temperature, "QA generation temperature")
            ->capture_default_str();
        cmd->add_option("--score-temperature", score_temperature, "Scoring temperature")
            ->capture_default_str();
        cmd->add_option("--chunk-budget", chunk_char_budget,
                        "Character budget per chunk before tail truncation")
            ->capture_default_str();
        cmd->add_option("--jobs", jobs, "Worker threads for chunk/paper scoring")
            ->capture_default_str();
        cmd->add_option("--bank", bank_path, "Question bank file")->capture_default_str();
        cmd->add_option("--individual", individual_path,
                        "Question-prompt combination JSON (mode hspim)");
    }

    PipelineConfig to_config() const {
        PipelineConfig cfg;
        cfg.use_qa = mode != "sspim";
        cfg.aggregation.mode = plus ? ScoreMode::hspim_plus : ScoreMode::hspim;
        cfg.aggregation.norm = norm_from_name(norm);
        cfg.aggregation.use_confidence_weights = !no_confidence_weights;
        if (!mask_csv.empty()) {
            std::set<SectionType> mask;
            std::stringstream ss(mask_csv);
            std::string item;
            while (std::getline(ss, item, ',')) {
                auto t = section_type_from_label(item);
                if (!t || *t == SectionType::Unmatched)
                    throw UsageError("unknown section type in --mask: " + item);
                mask.insert(*t);
            }
            cfg.aggregation.section_mask = std::move(mask);
        }
        cfg.classify_mode = strict_classify ? ClassifyMode::strict : ClassifyMode::lenient;
        cfg.qa_temperature = qa_temperature;
        cfg.score_temperature = score_temperature;
        cfg.chunk_char_budget = chunk_char_budget;
        cfg.jobs = jobs;
        return cfg;
    }

    Individual resolve_individual() const {
        if (mode == "hspim") {
            if (individual_path.empty())
                throw UsageError("--mode hspim needs --individual (an optimizer result); "
                                 "use hspim_naive for the default combination");
            return Individual::load(individual_path);
        }
        if (!individual_path.empty()) return Individual::load(individual_path);
        return Individual::defaults();
    }
};

std::string timestamp_utc() {
    auto now = std::chrono::system_clock::now();
    std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::ostringstream out;
    out << std::put_time(&tm, "%Y%m%dT%H%M%SZ");
    return out.str();
}

fs::path resolve_run_dir(const std::string& out_flag, const std::string& command) {
    fs::path dir = out_flag.empty()
                       ? fs::path("runs") / (command + "-" + timestamp_utc())
                       : fs::path(out_flag);
    fs::create_directories(dir);
    return dir;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw UsageError("cannot write " + path.string());
    out << text;
}

void write_effective_config(const fs::path& dir, const json& effective) {
    write_text(dir / "effective_config.json", effective.dump(2) + "\n");
    std::cout << "effective config: " << effective.dump() << "\n";
}

std::vector<const Paper*> select_split(const Dataset& dataset, const std::string& split) {
    std::vector<const Paper*> papers;
    if (split == "all") {
        for (const auto& p : dataset.papers) papers.push_back(&p);
    } else {
        papers = dataset.papers_in(split_from_name(split));
    }
    if (papers.empty())
        throw UsageError("no papers in split '" + split + "' of dataset " + dataset.name);
    return papers;
}

void print_label_stats(const Dataset& dataset) {
    auto print_one = [](const std::string& name, const LabelStats& st) {
        std::cout << "  " << std::left << std::setw(12) << name << " n=" << std::setw(5)
                  << st.n;
        if (st.n > 0)
            std::cout << " label mean=" << std::fixed << std::setprecision(4) << st.mean
                      << " variance=" << st.variance;
        std::cout << "\n";
    };
    std::cout << "label statistics for dataset '" << dataset.name << "':\n";
    for (Split s : {Split::train, Split::validation, Split::test, Split::unassigned}) {
        auto papers = dataset.papers_in(s);
        if (!papers.empty()) print_one(split_name(s), label_stats(papers));
    }
    std::vector<const Paper*> all;
    for (const auto& p : dataset.papers) all.push_back(&p);
    print_one("overall", label_stats(all));
}

// ---------------------------------------------------------------------------
// subcommands
// ---------------------------------------------------------------------------

struct IngestArgs {
    std::string input;
    std::string format = "hspim-json";
    std::string output;
    double split_fraction = 0.0;
    uint64_t seed = 0;
    bool override_splits = false;
};

int cmd_ingest(const IngestArgs& args) {
    Dataset dataset = load_dataset(args.input, args.format);
    if (args.split_fraction > 0.0)
        dataset = split_dataset(dataset, args.split_fraction, args.seed, args.override_splits);
    if (!args.output.empty()) {
        save_dataset(dataset, args.output);
        std::cout << "wrote " << dataset.papers.size() << " papers to " << args.output << "\n";
    }
    print_label_stats(dataset);
    return 0;
}

struct ScoreArgs {
    std::string dataset;
    std::string split = "test";
    uint64_t seed = 0;
    std::string out;
    ProviderFlags provider;
    PipelineFlags pipeline;
};

int cmd_score(const ScoreArgs& args) {
    Dataset dataset = load_dataset(args.dataset);
    auto papers = select_split(dataset, args.split);
    QuestionBank bank = QuestionBank::load(args.pipeline.bank_path);
    Individual individual = args.pipeline.resolve_individual();
    individual.validate(bank);
    PipelineConfig pcfg = args.pipeline.to_config();
    Gateway gateway(args.provider.to_config());

    fs::path run_dir = resolve_run_dir(args.out, "score");
    json effective = {{"command", "score"},
                      {"dataset", args.dataset},
                      {"split", args.split},
                      {"mode", args.pipeline.mode},
                      {"plus", args.pipeline.plus},
                      {"norm", args.pipeline.norm},
                      {"mask", args.pipeline.mask_csv},
                      {"use_confidence_weights", !args.pipeline.no_confidence_weights},
                      {"qa_temperature", pcfg.qa_temperature},
                      {"score_temperature", pcfg.score_temperature},
                      {"provider", args.provider.provider},
                      {"model", args.provider.model},
                      {"bank", args.pipeline.bank_path},
                      {"individual", json::parse(individual.to_json())},
                      {"seed", args.seed},
                      {"jobs", pcfg.jobs}};
    write_effective_config(run_dir, effective);

    pcfg.model = args.provider.model;
    auto scores = score_papers(papers, individual, bank, gateway, pcfg);

    std::vector<const PaperScore*> ordered;
    for (const auto& [id, ps] : scores) ordered.push_back(&ps);
    write_text(run_dir / "scores.json", paper_scores_to_json(ordered, pcfg) + "\n");

    std::map<std::string, double> predictions, labels;
    for (const Paper* p : papers) {
        if (p->reviews.empty()) continue;
        predictions[p->id] = scores.at(p->id).predicted;
        labels[p->id] = ground_truth(*p).innovation;
    }
    if (!predictions.empty()) {
        EvalReport report = evaluate(predictions, labels);
        write_text(run_dir / "eval.json", report.to_json() + "\n");
        std::cout << "scored " << papers.size() << " papers; labeled n=" << report.n
                  << " rmse=" << std::fixed << std::setprecision(4) << report.rmse
                  << " mae=" << report.mae << "\n";
    } else {
        std::cout << "scored " << papers.size() << " papers; no labeled papers for eval\n";
    }
    auto st = gateway.stats();
    std::cout << "llm calls=" << st.provider_calls << " cache hits=" << st.cache_hits << "\n"
              << "artifacts in " << run_dir.string() << "\n";
    return 0;
}

struct OptimizeArgs {
    std::string dataset;
    std::string split = "train";
    std::string strategy = "joint";
    int population = 10;
    int iterations = 5;
    double mutation_rate = 0.10;
    int elite_count = 0;
    size_t batch_size = 20;
    bool fixed_batch = false;
    int phase1_iterations = -1;
    int prune_size = 3;
    bool apply = false;
    uint64_t seed = 0;
    std::string out;
    ProviderFlags provider;
    PipelineFlags pipeline;
};

int cmd_optimize(const OptimizeArgs& args) {
    Dataset dataset = load_dataset(args.dataset);
    auto papers = select_split(dataset, args.split);
    for (const Paper* p : papers) {
        if (p->reviews.empty())
            throw UsageError("paper " + p->id + " in split '" + args.split +
                             "' has no reviews; optimization needs labels");
    }
    QuestionBank bank = QuestionBank::load(args.pipeline.bank_path);
    PipelineConfig pcfg = args.pipeline.to_config();
    pcfg.model = args.provider.model;
    Gateway gateway(args.provider.to_config());

    FitnessContext ctx;
    ctx.bank = &bank;
    ctx.gateway = &gateway;
    ctx.pipeline = pcfg;

    GAConfig ga;
    ga.population_size = args.population;
    ga.iterations = args.iterations;
    ga.mutation_rate = args.mutation_rate;
    ga.elite_count = args.elite_count;
    ga.seed = args.seed;
    ga.batch_size = args.batch_size;
    ga.fixed_batch = args.fixed_batch;
    ga.two_step_phase1_iterations = args.phase1_iterations;

    fs::path run_dir = resolve_run_dir(args.out, "optimize");
    json effective = {{"command", "optimize"},
                      {"dataset", args.dataset},
                      {"split", args.split},
                      {"strategy", args.strategy},
                      {"population", ga.population_size},
                      {"iterations", ga.iterations},
                      {"mutation_rate", ga.mutation_rate},
                      {"elite_count", ga.resolved_elite_count()},
                      {"batch_size", ga.batch_size},
                      {"fixed_batch", ga.fixed_batch},
                      {"prune_size", args.prune_size},
                      {"provider", args.provider.provider},
                      {"model", args.provider.model},
                      {"bank", args.pipeline.bank_path},
                      {"seed", args.seed}};
    write_effective_config(run_dir, effective);

    Individual winner = Individual::defaults();
    std::optional<std::set<SectionType>> winning_mask;

    if (args.strategy == "pruning") {
        Individual base = args.pipeline.individual_path.empty()
                              ? Individual::defaults()
                              : Individual::load(args.pipeline.individual_path);
        base.validate(bank);
        PruneResult result = prune_sections(args.prune_size, base, papers, ctx);
        winner = base;
        winning_mask = result.mask;
        json mask_json = json::array();
        for (SectionType t : result.mask) mask_json.push_back(section_type_name(t));
        json out = {{"mask", mask_json},
                    {"train_rmse", result.train_rmse},
                    {"masks_evaluated", result.masks_evaluated},
                    {"skipped", result.skipped},
                    {"llm_calls", gateway.stats().provider_calls}};
        write_text(run_dir / "prune_result.json", out.dump(2) + "\n");
        std::cout << "pruning: best mask";
        for (SectionType t : result.mask) std::cout << " " << section_type_name(t);
        std::cout << " train_rmse=" << std::fixed << std::setprecision(4) << result.train_rmse
                  << " (" << result.masks_evaluated << " masks)\n";
    } else {
        auto fitness_fn = make_pipeline_fitness(ctx);
        GARunReport report;
        if (args.strategy == "joint")
            report = run_joint(ga, bank, papers, fitness_fn);
        else if (args.strategy == "two_step")
            report = run_two_step(ga, bank, papers, fitness_fn);
        else
            throw UsageError("unknown strategy: " + args.strategy);
        report.llm_calls = gateway.stats().provider_calls;
        winner = report.best;
        write_text(run_dir / "ga_report.json", report.to_json() + "\n");
        write_text(run_dir / "fitness_trace.csv", report.fitness_trace_csv());
        std::cout << "strategy=" << args.strategy << " generations="
                  << report.generations.size() << " best_fitness=" << std::fixed
                  << std::setprecision(4) << report.best_fitness
                  << " llm_calls=" << report.llm_calls << "\n";
        for (const auto& g : report.generations)
            std::cout << "  generation " << g.generation << ": best=" << g.best_fitness
                      << " mean=" << g.mean_fitness << "\n";
    }
    winner.save((run_dir / "best_individual.json").string());

    if (args.apply) {
        auto test_papers = select_split(dataset, "test");
        PipelineConfig apply_cfg = pcfg;
        if (winning_mask) apply_cfg.aggregation.section_mask = winning_mask;
        auto scores = score_papers(test_papers, winner, bank, gateway, apply_cfg);
        std::map<std::string, double> predictions, labels;
        for (const Paper* p : test_papers) {
            if (p->reviews.empty()) continue;
            predictions[p->id] = scores.at(p->id).predicted;
            labels[p->id] = ground_truth(*p).innovation;
        }
        std::vector<const PaperScore*> ordered;
        for (const auto& [id, ps] : scores) ordered.push_back(&ps);
        write_text(run_dir / "apply_scores.json", paper_scores_to_json(ordered, apply_cfg) + "\n");
        if (!predictions.empty()) {
            EvalReport report = evaluate(predictions, labels);
            write_text(run_dir / "apply_eval.json", report.to_json() + "\n");
            std::cout << "applied to test split: rmse=" << std::fixed << std::setprecision(4)
                      << report.rmse << " mae=" << report.mae << "\n";
        }
    }
    std::cout << "artifacts in " << run_dir.string() << "\n";
    return 0;
}

struct ReportArgs {
    std::string scores;
    std::string eval;
    std::string csv;
};

int cmd_report(const ReportArgs& args) {
    if (!args.eval.empty() && !fs::exists(args.eval))
        throw UsageError("eval report not found: " + args.eval);
    if (!args.scores.empty() && !fs::exists(args.scores))
        throw UsageError("scores file not found: " + args.scores);
    if (args.scores.empty() && args.eval.empty())
        throw UsageError("report needs --scores and/or --eval");

    if (!args.eval.empty()) {
        std::ifstream in(args.eval, std::ios::binary);
        std::ostringstream ss;
        ss << in.rdbuf();
        EvalReport report = EvalReport::from_json(ss.str());
        std::cout << "n=" << report.n << "\n"
                  << std::fixed << std::setprecision(4)
                  << "rmse=" << report.rmse << " mae=" << report.mae << "\n"
                  << "predicted: mean=" << report.mean_predicted
                  << " variance=" << report.var_predicted << "\n"
                  << "label:     mean=" << report.mean_label
                  << " variance=" << report.var_label << "\n";
        std::cout << std::left << std::setw(24) << "paper" << std::right << std::setw(10)
                  << "predicted" << std::setw(10) << "label" << std::setw(10) << "error"
                  << "\n";
        for (const auto& pe : report.per_paper)
            std::cout << std::left << std::setw(24) << pe.id << std::right << std::setw(10)
                      << pe.predicted << std::setw(10) << pe.label << std::setw(10) << pe.error
                      << "\n";
        if (!args.csv.empty()) {
            std::ostringstream csv;
            csv << "id,predicted,label,error\n";
            for (const auto& pe : report.per_paper)
                csv << pe.id << ',' << pe.predicted << ',' << pe.label << ',' << pe.error
                    << '\n';
            write_text(args.csv, csv.str());
            std::cout << "wrote " << report.per_paper.size() << " rows to " << args.csv
                      << "\n";
        }
    }
    if (!args.scores.empty()) {
        std::ifstream in(args.scores, std::ios::binary);
        json root;
        try {
            root = json::parse(in);
        } catch (const json::exception& e) {
            throw UsageError(std::string("malformed scores file: ") + e.what());
        }
        std::cout << "scores: mode=" << root.value("mode", std::string("?")) << " papers="
                  << root.at("papers").size() << "\n";
        for (const auto& p : root.at("papers"))
            std::cout << "  " << std::left << std::setw(24)
                      << p.at("paper_id").get<std::string>() << " predicted="
                      << p.at("predicted").get<double>() << " chunks="
                      << p.at("chunks").size() << "\n";
    }
    return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
    CLI::App app{"Hierarchical innovation scoring for scientific papers"};
    app.require_subcommand(1);
    app.set_config("--config", "", "Read defaults from an INI/TOML file");

    IngestArgs ingest;
    auto* ingest_cmd = app.add_subcommand("ingest", "Convert a corpus export to hspim-json");
    ingest_cmd->add_option("--input", ingest.input, "Input corpus file")->required();
    ingest_cmd->add_option("--input-format", ingest.format, "hspim-json or peerread-json")
        ->capture_default_str();
    ingest_cmd->add_option("--output", ingest.output, "Output hspim-json path");
    ingest_cmd->add_option("--split-fraction", ingest.split_fraction,
                           "Assign train/test splits with this train fraction");
    ingest_cmd->add_option("--seed", ingest.seed, "Split assignment seed")
        ->capture_default_str();
    ingest_cmd->add_flag("--override-splits", ingest.override_splits,
                         "Reassign papers that already carry a split tag");

    ScoreArgs score;
    auto* score_cmd = app.add_subcommand("score", "Score a dataset split");
    score_cmd->add_option("--dataset", score.dataset, "hspim-json dataset")->required();
    score_cmd->add_option("--split", score.split, "train, validation, test, or all")
        ->check(CLI::IsMember({"train", "validation", "test", "all"}))
        ->capture_default_str();
    score_cmd->add_option("--seed", score.seed, "Run seed")->capture_default_str();
    score_cmd->add_option("--out", score.out, "Run directory (default runs/<cmd>-<time>)");
    score.provider.attach(score_cmd);
    score.pipeline.attach(score_cmd, true);

    OptimizeArgs optimize;
    auto* opt_cmd = app.add_subcommand("optimize", "Search question-prompt combinations");
    opt_cmd->add_option("--dataset", optimize.dataset, "hspim-json dataset")->required();
    opt_cmd->add_option("--split", optimize.split, "Split to optimize on")
        ->capture_default_str();
    opt_cmd->add_option("--strategy", optimize.strategy, "joint, two_step, or pruning")
        ->check(CLI::IsMember({"joint", "two_step", "pruning"}))
        ->capture_default_str();
    opt_cmd->add_option("--population", optimize.population, "GA population size P")
        ->capture_default_str();
    opt_cmd->add_option("--iterations", optimize.iterations, "GA iterations I")
        ->capture_default_str();
    opt_cmd->add_option("--mutation-rate", optimize.mutation_rate, "Per-slot mutation rate")
        ->capture_default_str();
    opt_cmd->add_option("--elite-count", optimize.elite_count,
                        "Elites kept per generation (0 = max{1, 0.2P})")
        ->capture_default_str();
    opt_cmd->add_option("--batch-size", optimize.batch_size, "Papers sampled per generation")
        ->capture_default_str();
    opt_cmd->add_flag("--fixed-batch", optimize.fixed_batch,
                      "Reuse the first batch every generation");
    opt_cmd->add_option("--phase1-iterations", optimize.phase1_iterations,
                        "two_step: iterations for the common-question phase (-1 = half)")
        ->capture_default_str();
    opt_cmd->add_option("--prune-size", optimize.prune_size, "pruning: subset size s'")
        ->capture_default_str();
    opt_cmd->add_flag("--apply", optimize.apply, "Re-score the test split with the winner");
    opt_cmd->add_option("--seed", optimize.seed, "Run seed")->capture_default_str();
    opt_cmd->add_option("--out", optimize.out, "Run directory");
    optimize.provider.attach(opt_cmd);
    optimize.pipeline.attach(opt_cmd, false);

    ReportArgs report;
    auto* report_cmd = app.add_subcommand("report", "Render score/eval artifacts");
    report_cmd->add_option("--scores", report.scores, "scores.json from a score run");
    report_cmd->add_option("--eval", report.eval, "eval.json from a score run");
    report_cmd->add_option("--csv", report.csv, "Write per-paper rows to this CSV");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {  // --help
            app.exit(e);
            return 0;
        }
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    }

    try {
        if (app.got_subcommand(ingest_cmd)) return cmd_ingest(ingest);
        if (app.got_subcommand(score_cmd)) return cmd_score(score);
        if (app.got_subcommand(opt_cmd)) return cmd_optimize(optimize);
        if (app.got_subcommand(report_cmd)) return cmd_report(report);
        std::cerr << "usage error: no subcommand\n";
        return 2;
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const CorpusError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

int run_cli(int argc, const char* const* argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run_cli(args);
}

}  // namespace hspim
