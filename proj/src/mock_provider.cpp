#include <sstream>
#include <string>
#include <vector>

#include "hspim/gateway.hpp"
#include "hspim/prompts.hpp"
#include "hspim/util.hpp"

namespace hspim {

namespace {

// Extracts the text between the first open/close marker pair, if present.
std::optional<std::string> between(const std::string& text, const char* open,
                                   const char* close) {
    size_t b = text.find(open);
    if (b == std::string::npos) return std::nullopt;
    b += std::string(open).size();
    size_t e = text.find(close, b);
    if (e == std::string::npos) return std::nullopt;
    return text.substr(b, e - b);
}

std::optional<std::string> line_after(const std::string& text, const char* lead) {
    size_t b = text.find(lead);
    if (b == std::string::npos) return std::nullopt;
    b += std::string(lead).size();
    size_t e = text.find('\n', b);
    if (e == std::string::npos) e = text.size();
    return text.substr(b, e - b);
}

std::string hex16(uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<size_t>(i)] = digits[v & 0xF];
        v >>= 4;
    }
    return out;
}

struct KeywordRule {
    const char* keyword;
    SectionType type;
};

// Ordered: more specific phrases first so "Experiment Analysis" does not
// fall into Experiments and "Analysis Theory" does not fall into Approach.
constexpr KeywordRule kKeywordTable[] = {
    {"experiment analysis", SectionType::ExperimentAnalysis},
    {"analysis of experiment", SectionType::ExperimentAnalysis},
    {"result analysis", SectionType::ExperimentAnalysis},
    {"analysis theory", SectionType::AnalysisTheory},
    {"theoretical", SectionType::AnalysisTheory},
    {"theory", SectionType::AnalysisTheory},
    {"abstract", SectionType::Abstract},
    {"introduction", SectionType::Introduction},
    {"related work", SectionType::RelatedWork},
    {"background", SectionType::RelatedWork},
    {"prior work", SectionType::RelatedWork},
    {"experiment", SectionType::Experiments},
    {"evaluation", SectionType::Experiments},
    {"results", SectionType::Experiments},
    {"approach", SectionType::Approach},
    {"methodology", SectionType::Approach},
    {"method", SectionType::Approach},
    {"model", SectionType::Approach},
    {"discussion", SectionType::Discussion},
    {"limitation", SectionType::Discussion},
    {"conclusion", SectionType::Conclusion},
    {"summary", SectionType::Conclusion},
};

}  // namespace

std::string MockProvider::first_sentence(const std::string& text) {
    std::string t = trim(text);
    size_t end = t.find_first_of(".!?");
    std::string sentence = (end == std::string::npos) ? t : t.substr(0, end + 1);
    if (sentence.size() > 240) sentence = sentence.substr(0, 240);
    return sentence;
}

std::string MockProvider::classify_heading(uint64_t seed, const std::string& heading,
                                           bool allow_unmatched) {
    std::string h = to_lower(heading);
    for (const auto& rule : kKeywordTable) {
        if (h.find(rule.keyword) != std::string::npos)
            return section_type_label(rule.type);
    }
    if (allow_unmatched) return "Unmatched";
    uint64_t pick = fnv1a64(heading, hash_mix(fnv1a64("classify-fallback"), seed));
    return section_type_label(all_section_types()[pick % kSectionTypeCount]);
}

std::string MockProvider::qa_digest(uint64_t seed, const std::string& question,
                                    const std::string& chunk_text) {
    uint64_t h = fnv1a64(question + "|" + first_sentence(chunk_text),
                         hash_mix(fnv1a64("qa"), seed));
    return "qa-" + hex16(h);
}

std::string MockProvider::qa_answer(uint64_t seed, const std::string& question,
                                    const std::string& chunk_text) {
    return "[" + qa_digest(seed, question, chunk_text) + "] " + first_sentence(chunk_text) +
           " Question considered: " + question;
}

double MockProvider::score_value(uint64_t seed, const std::string& key,
                                 const std::string& chunk_text, const std::string& user_text) {
    // Base value is a function of the chunk text alone so that re-wording the
    // surrounding prompt (QA on/off, relabeled section) moves the score only
    // within the +-0.15 wobble band.
    uint64_t hb = fnv1a64(chunk_text, hash_mix(fnv1a64("score-base:" + key), seed));
    uint64_t hw = fnv1a64(user_text, hash_mix(fnv1a64("score-wobble:" + key), seed));
    double base = 1.2 + 3.6 * unit_from_hash(hb);
    double wobble = -0.15 + 0.30 * unit_from_hash(hw);
    return round1(base + wobble);
}

std::string MockProvider::complete(const CompletionRequest& request) {
    const std::string& user = request.user;

    if (user.find(prompts::kClassifyLead) != std::string::npos) {
        std::string heading = line_after(user, prompts::kHeadingLead).value_or("");
        bool allow_unmatched = user.find("Unmatched") != std::string::npos;
        return classify_heading(seed_, heading, allow_unmatched);
    }

    if (user.find(prompts::kScoreLead) != std::string::npos) {
        std::string chunk = between(user, prompts::kContentOpen, prompts::kContentClose)
                                .value_or(user);
        // requested keys are listed, quoted, after the score lead
        std::vector<std::string> keys;
        size_t pos = user.find(prompts::kScoreLead);
        size_t q = user.find('"', pos);
        while (q != std::string::npos) {
            size_t e = user.find('"', q + 1);
            if (e == std::string::npos) break;
            keys.push_back(user.substr(q + 1, e - q - 1));
            q = user.find('"', e + 1);
        }
        std::ostringstream out;
        out << "{";
        bool first = true;
        bool with_qa = user.find(prompts::kQaOpen) != std::string::npos;
        for (const auto& key : keys) {
            if (!first) out << ", ";
            first = false;
            if (key == "reason") {
                std::string reason = "Assessed section: " + first_sentence(chunk);
                if (with_qa) {
                    std::string question =
                        between(user, "Q: ", "\nA: ").value_or("");
                    reason += " Question considered: " + question;
                }
                out << "\"reason\": " << nlohmann::json(reason).dump();
            } else {
                out << '"' << key << "\": " << score_value(seed_, key, chunk, user);
            }
        }
        out << "}";
        return out.str();
    }

    if (user.rfind(prompts::kQuestionLead, 0) == 0) {
        std::string question = line_after(user, prompts::kQuestionLead).value_or("");
        std::string chunk = between(user, prompts::kContentOpen, prompts::kContentClose)
                                .value_or("");
        return qa_answer(seed_, question, chunk);
    }

    // Anything else: a stable echo tag, enough for cache and retry tests.
    return "mock-" + hex16(fnv1a64(request.model + "\x1f" + request.system + "\x1f" + user,
                                   hash_mix(fnv1a64("echo"), seed_)));
}

}  // namespace hspim
