#include "hspim/prompts.hpp"

#include <sstream>

namespace hspim::prompts {

namespace {

std::string joined_labels(bool allow_unmatched) {
    std::string out;
    bool first = true;
    for (SectionType t : all_section_types()) {
        if (!first) out += ", ";
        out += section_type_label(t);
        first = false;
    }
    if (allow_unmatched) out += ", Unmatched";
    return out;
}

}  // namespace

std::string classification_system() {
    return "You label sections of scientific papers with their section type.";
}

std::string classification_user(const std::string& heading, const std::string& body_prefix,
                                bool allow_unmatched) {
    std::ostringstream out;
    out << kClassifyLead << " into exactly one of these section types:\n"
        << joined_labels(allow_unmatched) << "\n";
    if (allow_unmatched)
        out << "Reply with the single label and nothing else. "
               "If no type fits confidently, reply Unmatched.\n";
    else
        out << "Reply with the single label and nothing else. "
               "Always pick the closest type.\n";
    out << kHeadingLead << heading << "\n"
        << "Body:\n" << kContentOpen << body_prefix << kContentClose << "\n";
    return out.str();
}

std::string qa_system() {
    return "You analyze scientific paper sections and answer questions about "
           "their innovation, grounded only in the given text.";
}

std::string qa_user(const std::string& question, const std::string& body) {
    std::ostringstream out;
    out << kQuestionLead << question << "\n"
        << "Section content:\n" << kContentOpen << body << kContentClose << "\n"
        << "Answer the question based only on the section content.";
    return out.str();
}

std::string scoring_system() {
    // Scoring rubric in the style of a conference review form: 5 means
    // transformative, 1 means no merit; confidence rates the scorer's own
    // certainty on the same 1-5 scale.
    return "You are a careful peer reviewer judging one section of a scientific "
           "paper. Rate each requested attribute on a 1-5 scale: "
           "5 = transformative, could change the field; 4 = creative and "
           "substantive; 3 = respectable but incremental; 2 = marginal novelty; "
           "1 = no new contribution. Rate each confidence on a 1-5 scale: "
           "5 = certain, expert-level familiarity; 3 = reasonably sure; "
           "1 = an educated guess. Base every judgment only on the provided text.";
}

std::string scoring_user(SectionType type, const std::string& body,
                         const std::optional<std::pair<std::string, std::string>>& qa,
                         const std::vector<std::string>& keys) {
    std::ostringstream out;
    out << "Evaluate the following paper section.\n"
        << "Section type: " << section_type_label(type) << "\n"
        << "Section content:\n" << kContentOpen << body << kContentClose << "\n";
    if (qa) {
        out << "Question-answer context:\n"
            << kQaOpen << "Q: " << qa->first << "\nA: " << qa->second << kQaClose << "\n";
    }
    out << kScoreLead << " with exactly these keys: ";
    for (size_t i = 0; i < keys.size(); ++i) {
        if (i > 0) out << ", ";
        out << '"' << keys[i] << '"';
    }
    out << ". Scores are numbers in [1,5]; \"reason\" is a short justification.";
    return out.str();
}

}  // namespace hspim::prompts
