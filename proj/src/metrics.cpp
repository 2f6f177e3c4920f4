#include "hspim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <json.hpp>

#include "hspim/errors.hpp"

namespace hspim {

using nlohmann::json;

EvalReport evaluate(const std::map<std::string, double>& predictions,
                    const std::map<std::string, double>& labels) {
    if (predictions.empty() || labels.empty())
        throw UsageError("evaluate: empty prediction or label map");
    std::vector<std::string> only_pred, only_label;
    for (const auto& [id, _] : predictions)
        if (!labels.count(id)) only_pred.push_back(id);
    for (const auto& [id, _] : labels)
        if (!predictions.count(id)) only_label.push_back(id);
    if (!only_pred.empty() || !only_label.empty()) {
        std::ostringstream msg;
        msg << "evaluate: key sets differ;";
        if (!only_pred.empty()) {
            msg << " only in predictions:";
            for (const auto& id : only_pred) msg << ' ' << id;
            msg << ';';
        }
        if (!only_label.empty()) {
            msg << " only in labels:";
            for (const auto& id : only_label) msg << ' ' << id;
        }
        throw UsageError(msg.str());
    }

    EvalReport report;
    report.n = predictions.size();
    double se = 0.0, ae = 0.0, sp = 0.0, sl = 0.0;
    for (const auto& [id, pred] : predictions) {
        double label = labels.at(id);
        double err = pred - label;
        report.per_paper.push_back({id, pred, label, err});
        se += err * err;
        ae += std::abs(err);
        sp += pred;
        sl += label;
    }
    double n = static_cast<double>(report.n);
    report.rmse = std::sqrt(se / n);
    report.mae = ae / n;
    report.mean_predicted = sp / n;
    report.mean_label = sl / n;
    double vp = 0.0, vl = 0.0;
    for (const auto& pe : report.per_paper) {
        vp += (pe.predicted - report.mean_predicted) * (pe.predicted - report.mean_predicted);
        vl += (pe.label - report.mean_label) * (pe.label - report.mean_label);
    }
    report.var_predicted = vp / n;
    report.var_label = vl / n;
    return report;
}

std::string EvalReport::to_json() const {
    json root;
    root["rmse"] = rmse;
    root["mae"] = mae;
    root["n"] = n;
    root["mean_predicted"] = mean_predicted;
    root["mean_label"] = mean_label;
    root["var_predicted"] = var_predicted;
    root["var_label"] = var_label;
    if (bert_score)
        root["bert_score"] = *bert_score;
    else
        root["bert_score"] = nullptr;
    json pp = json::array();
    for (const auto& pe : per_paper)
        pp.push_back({{"id", pe.id},
                      {"predicted", pe.predicted},
                      {"label", pe.label},
                      {"error", pe.error}});
    root["per_paper"] = std::move(pp);
    return root.dump(2);
}

EvalReport EvalReport::from_json(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::exception& e) {
        throw UsageError(std::string("malformed eval report JSON: ") + e.what());
    }
    EvalReport report;
    report.rmse = root.at("rmse").get<double>();
    report.mae = root.at("mae").get<double>();
    report.n = root.at("n").get<size_t>();
    report.mean_predicted = root.value("mean_predicted", 0.0);
    report.mean_label = root.value("mean_label", 0.0);
    report.var_predicted = root.value("var_predicted", 0.0);
    report.var_label = root.value("var_label", 0.0);
    if (root.contains("bert_score") && !root["bert_score"].is_null())
        report.bert_score = root["bert_score"].get<double>();
    if (root.contains("per_paper")) {
        for (const auto& node : root["per_paper"])
            report.per_paper.push_back({node.at("id").get<std::string>(),
                                        node.at("predicted").get<double>(),
                                        node.at("label").get<double>(),
                                        node.at("error").get<double>()});
    }
    return report;
}

std::string join_texts(const std::vector<std::string>& parts) {
    std::string out;
    for (size_t i = 0; i < parts.size(); ++i) {
        if (i > 0) out += "\n";
        out += parts[i];
    }
    return out;
}

double cosine_reason_similarity(const std::vector<std::string>& reasons,
                                const std::vector<std::string>& comments,
                                Embedder& embedder) {
    if (reasons.empty() || comments.empty())
        throw UsageError("cosine_reason_similarity: empty input lists");
    if (reasons.size() != comments.size())
        throw UsageError("cosine_reason_similarity: list sizes differ (" +
                         std::to_string(reasons.size()) + " vs " +
                         std::to_string(comments.size()) + ")");
    double sum = 0.0;
    for (size_t i = 0; i < reasons.size(); ++i) {
        auto a = embedder.embed(reasons[i]);
        auto b = embedder.embed(comments[i]);
        sum += cosine_similarity(a, b);
    }
    return sum / static_cast<double>(reasons.size());
}

}  // namespace hspim
