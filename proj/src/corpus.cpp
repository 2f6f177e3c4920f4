#include "hspim/corpus.hpp"

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "hspim/errors.hpp"
#include "hspim/util.hpp"

namespace hspim {

using nlohmann::json;

std::string split_name(Split s) {
    switch (s) {
        case Split::train: return "train";
        case Split::validation: return "validation";
        case Split::test: return "test";
        case Split::unassigned: return "unassigned";
    }
    return "unassigned";
}

Split split_from_name(const std::string& name) {
    if (name == "train") return Split::train;
    if (name == "validation") return Split::validation;
    if (name == "test") return Split::test;
    if (name == "unassigned" || name.empty()) return Split::unassigned;
    throw CorpusError("unknown split name: " + name);
}

const Paper* Dataset::find(const std::string& id) const {
    for (const auto& p : papers)
        if (p.id == id) return &p;
    return nullptr;
}

std::vector<const Paper*> Dataset::papers_in(Split s) const {
    std::vector<const Paper*> out;
    for (const auto& p : papers)
        if (p.split == s) out.push_back(&p);
    return out;
}

namespace {

void check_review_score(int value, const char* field, const std::string& paper_id) {
    if (value < 1 || value > 5)
        throw CorpusError("paper " + paper_id + ": review field '" + field +
                          "' out of range [1,5]: " + std::to_string(value));
}

// Looks a field up under any of the mapped names.
const json* find_field(const json& obj, const std::vector<std::string>& keys) {
    for (const auto& k : keys) {
        auto it = obj.find(k);
        if (it != obj.end()) return &*it;
    }
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        std::string lk = to_lower(it.key());
        for (const auto& k : keys) {
            if (lk == to_lower(k)) return &*it;
        }
    }
    return nullptr;
}

int read_score_field(const json& review, const std::vector<std::string>& keys,
                     const char* canonical, const std::string& paper_id) {
    const json* v = find_field(review, keys);
    if (!v)
        throw CorpusError("paper " + paper_id + ": review is missing '" +
                          std::string(canonical) + "'");
    int score = 0;
    if (v->is_number_integer()) {
        score = v->get<int>();
    } else if (v->is_string()) {
        try {
            score = std::stoi(v->get<std::string>());
        } catch (const std::exception&) {
            throw CorpusError("paper " + paper_id + ": review field '" +
                              std::string(canonical) + "' is not an integer");
        }
    } else {
        throw CorpusError("paper " + paper_id + ": review field '" +
                          std::string(canonical) + "' is not an integer");
    }
    check_review_score(score, canonical, paper_id);
    return score;
}

Review parse_review(const json& node, const FieldMap& fields, const std::string& paper_id) {
    if (!node.is_object())
        throw CorpusError("paper " + paper_id + ": review record is not an object");
    Review r;
    r.originality = read_score_field(node, fields.originality_keys, "originality", paper_id);
    r.soundness = read_score_field(node, fields.soundness_keys, "soundness", paper_id);
    if (const json* c = find_field(node, fields.comment_keys)) {
        if (c->is_string()) r.comment = c->get<std::string>();
    }
    return r;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CorpusError("cannot open dataset file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    std::string text = ss.str();
    if (text.size() >= 3 && static_cast<unsigned char>(text[0]) == 0xEF &&
        static_cast<unsigned char>(text[1]) == 0xBB &&
        static_cast<unsigned char>(text[2]) == 0xBF)
        throw CorpusError("dataset file starts with a UTF-8 BOM, which the format forbids: " + path);
    return text;
}

json parse_json_file(const std::string& path) {
    std::string text = read_file(path);
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        throw CorpusError("malformed JSON in " + path + ": " + e.what());
    }
}

void validate_dataset(const Dataset& ds) {
    if (ds.papers.empty()) throw CorpusError("dataset '" + ds.name + "' contains no papers");
    std::vector<std::string> ids;
    for (const auto& p : ds.papers) {
        if (p.id.empty()) throw CorpusError("dataset contains a paper with an empty id");
        if (p.raw_sections.empty())
            throw CorpusError("paper " + p.id + ": no sections");
        ids.push_back(p.id);
    }
    std::sort(ids.begin(), ids.end());
    auto dup = std::adjacent_find(ids.begin(), ids.end());
    if (dup != ids.end()) throw CorpusError("duplicate paper id: " + *dup);
}

Dataset read_hspim_json(const std::string& path, const ReaderOptions& options) {
    json root = parse_json_file(path);
    if (!root.is_object() || !root.contains("papers") || !root["papers"].is_array())
        throw CorpusError("dataset file lacks the top-level \"papers\" array: " + path);
    Dataset ds;
    ds.name = root.value("name", std::string("unnamed"));
    ds.schema_version = root.value("schema_version", std::string("1"));
    for (const auto& pnode : root["papers"]) {
        Paper p;
        if (!pnode.contains("id") || !pnode["id"].is_string())
            throw CorpusError("paper record without a string \"id\" in " + path);
        p.id = pnode["id"].get<std::string>();
        if (!pnode.contains("sections") || !pnode["sections"].is_array())
            throw CorpusError("paper " + p.id + ": missing \"sections\" array");
        for (const auto& snode : pnode["sections"]) {
            RawSection sec;
            sec.heading = snode.value("heading", std::string());
            sec.body = snode.value("text", std::string());
            p.raw_sections.push_back(std::move(sec));
        }
        if (pnode.contains("reviews") && pnode["reviews"].is_array()) {
            for (const auto& rnode : pnode["reviews"])
                p.reviews.push_back(parse_review(rnode, options.fields, p.id));
        }
        if (pnode.contains("split") && pnode["split"].is_string())
            p.split = split_from_name(pnode["split"].get<std::string>());
        ds.papers.push_back(std::move(p));
    }
    validate_dataset(ds);
    return ds;
}

// PeerRead-style export: an array of paper objects whose reviews use the
// upper-case form field names. Sections may live either at the top level or
// under "metadata".
Dataset read_peerread_json(const std::string& path, const ReaderOptions& options) {
    json root = parse_json_file(path);
    const json* arr = nullptr;
    if (root.is_array()) arr = &root;
    else if (root.is_object() && root.contains("papers")) arr = &root["papers"];
    if (!arr || !arr->is_array())
        throw CorpusError("peerread-json expects a top-level array of papers: " + path);
    Dataset ds;
    ds.name = "peerread-import";
    size_t counter = 0;
    for (const auto& pnode : *arr) {
        Paper p;
        if (pnode.contains("id") && pnode["id"].is_string())
            p.id = pnode["id"].get<std::string>();
        else if (pnode.contains("id") && pnode["id"].is_number())
            p.id = std::to_string(pnode["id"].get<int64_t>());
        else
            p.id = "paper-" + std::to_string(counter);
        ++counter;
        const json* sections = nullptr;
        if (pnode.contains("sections")) sections = &pnode["sections"];
        else if (pnode.contains("metadata") && pnode["metadata"].contains("sections"))
            sections = &pnode["metadata"]["sections"];
        if (!sections || !sections->is_array())
            throw CorpusError("paper " + p.id + ": missing \"sections\" array");
        for (const auto& snode : *sections) {
            RawSection sec;
            sec.heading = snode.value("heading", std::string());
            sec.body = snode.value("text", std::string());
            p.raw_sections.push_back(std::move(sec));
        }
        if (pnode.contains("reviews") && pnode["reviews"].is_array()) {
            for (const auto& rnode : pnode["reviews"])
                p.reviews.push_back(parse_review(rnode, options.fields, p.id));
        }
        if (pnode.contains("split") && pnode["split"].is_string())
            p.split = split_from_name(pnode["split"].get<std::string>());
        ds.papers.push_back(std::move(p));
    }
    validate_dataset(ds);
    return ds;
}

}  // namespace

std::vector<std::string> registered_formats() {
    return {"hspim-json", "peerread-json"};
}

Dataset load_dataset(const std::string& path, const std::string& format,
                     const ReaderOptions& options) {
    if (format == "hspim-json") return read_hspim_json(path, options);
    if (format == "peerread-json") return read_peerread_json(path, options);
    throw UsageError("unknown dataset format id: " + format);
}

void save_dataset(const Dataset& dataset, const std::string& path) {
    json root;
    root["name"] = dataset.name;
    root["schema_version"] = dataset.schema_version;
    json papers = json::array();
    for (const auto& p : dataset.papers) {
        json pnode;
        pnode["id"] = p.id;
        json sections = json::array();
        for (const auto& s : p.raw_sections)
            sections.push_back({{"heading", s.heading}, {"text", s.body}});
        pnode["sections"] = std::move(sections);
        json reviews = json::array();
        for (const auto& r : p.reviews)
            reviews.push_back({{"originality", r.originality},
                               {"soundness", r.soundness},
                               {"comment", r.comment}});
        pnode["reviews"] = std::move(reviews);
        if (p.split == Split::unassigned)
            pnode["split"] = nullptr;
        else
            pnode["split"] = split_name(p.split);
        papers.push_back(std::move(pnode));
    }
    root["papers"] = std::move(papers);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw CorpusError("cannot write dataset file: " + path);
    out << root.dump(2) << "\n";
}

GroundTruthLabel ground_truth(const Paper& paper) {
    if (paper.reviews.empty())
        throw CorpusError("paper " + paper.id + ": ground truth requires at least one review");
    double sum = 0.0;
    for (const auto& r : paper.reviews)
        sum += (static_cast<double>(r.originality) + static_cast<double>(r.soundness)) / 2.0;
    return GroundTruthLabel{paper.id, sum / static_cast<double>(paper.reviews.size())};
}

Dataset split_dataset(const Dataset& dataset, double train_fraction, uint64_t seed,
                      bool override_existing) {
    if (!(train_fraction > 0.0) || !(train_fraction < 1.0))
        throw UsageError("train_fraction must lie strictly between 0 and 1, got " +
                         std::to_string(train_fraction));
    Dataset out = dataset;
    std::vector<size_t> pool;
    for (size_t i = 0; i < out.papers.size(); ++i) {
        if (override_existing || out.papers[i].split == Split::unassigned)
            pool.push_back(i);
    }
    std::mt19937_64 rng(seed);
    deterministic_shuffle(pool, rng);
    size_t n_train = static_cast<size_t>(std::floor(train_fraction * static_cast<double>(pool.size())));
    for (size_t k = 0; k < pool.size(); ++k)
        out.papers[pool[k]].split = (k < n_train) ? Split::train : Split::test;
    return out;
}

LabelStats label_stats(const std::vector<const Paper*>& papers) {
    LabelStats st;
    std::vector<double> labels;
    for (const Paper* p : papers) {
        if (!p->reviews.empty()) labels.push_back(ground_truth(*p).innovation);
    }
    st.n = labels.size();
    if (labels.empty()) return st;
    st.mean = std::accumulate(labels.begin(), labels.end(), 0.0) / static_cast<double>(labels.size());
    double ss = 0.0;
    for (double v : labels) ss += (v - st.mean) * (v - st.mean);
    st.variance = ss / static_cast<double>(labels.size());
    return st;
}

}  // namespace hspim
