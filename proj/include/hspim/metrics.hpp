#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hspim/gateway.hpp"

namespace hspim {

struct PaperError {
    std::string id;
    double predicted = 0.0;
    double label = 0.0;
    double error = 0.0;  // predicted - label
};

struct EvalReport {
    double rmse = 0.0;
    double mae = 0.0;
    size_t n = 0;
    std::vector<PaperError> per_paper;  // sorted by id
    double mean_predicted = 0.0;
    double mean_label = 0.0;
    double var_predicted = 0.0;  // population variance
    double var_label = 0.0;
    std::optional<double> bert_score;  // reserved; never populated here

    std::string to_json() const;
    static EvalReport from_json(const std::string& text);
};

// RMSE/MAE plus distribution summaries. Key sets must match exactly; a
// mismatch reports the symmetric difference.
EvalReport evaluate(const std::map<std::string, double>& predictions,
                    const std::map<std::string, double>& labels);

// Mean over papers of cos(embed(reasons[i]), embed(comments[i])). Callers
// concatenate multiple reasons/comments per paper before passing them in;
// join_texts below is the canonical way.
double cosine_reason_similarity(const std::vector<std::string>& reasons,
                                const std::vector<std::string>& comments,
                                Embedder& embedder);

std::string join_texts(const std::vector<std::string>& parts);

}  // namespace hspim
