#include "fds/model.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "fds/error.hpp"
#include "fds/util.hpp"
#include "json.hpp"

namespace fds {

namespace {

using nlohmann::json;

constexpr int kModelVersion = 1;

void check_finite(const std::vector<double>& values, const std::string& what) {
  for (double v : values) {
    if (!std::isfinite(v)) {
      raise(ErrorKind::Inconsistent, what + " contains a non-finite value");
    }
  }
}

}  // namespace

const SemanticFunction& FdsModel::function(PredicateId id) const {
  if (id.index >= functions.size()) {
    raise(ErrorKind::Vocab,
          "no semantic function for predicate index " + std::to_string(id.index));
  }
  return functions[id.index];
}

void validate(const FdsModel& model) {
  validate(model.config);
  if (model.functions.size() != model.vocab.size()) {
    raise(ErrorKind::Inconsistent,
          "model has " + std::to_string(model.functions.size()) +
              " semantic functions for " + std::to_string(model.vocab.size()) +
              " vocabulary entries");
  }
  for (std::size_t i = 0; i < model.functions.size(); ++i) {
    const SemanticFunction& f = model.functions[i];
    if (static_cast<int>(f.weights.size()) != model.config.dim) {
      raise(ErrorKind::Inconsistent,
            "semantic function for " + model.vocab.entries()[i].form +
                " has wrong dimension");
    }
    check_finite(f.weights, "weights of " + model.vocab.entries()[i].form);
    if (!std::isfinite(f.bias)) {
      raise(ErrorKind::Inconsistent,
            "bias of " + model.vocab.entries()[i].form + " is not finite");
    }
  }
  for (const LinkMatrix* m : {&model.arg1, &model.arg2}) {
    if (m->dim() != model.config.dim) {
      raise(ErrorKind::Inconsistent, "link matrix has wrong dimension");
    }
    check_finite(m->values(), "link matrix");
  }
}

double truth_probability(const SemanticFunction& f, const Pixie& x) {
  double z = f.bias;
  for (std::int32_t i : x.active) {
    if (i < 0 || static_cast<std::size_t>(i) >= f.weights.size()) {
      raise(ErrorKind::Dimension,
            "pixie dimension " + std::to_string(i) +
                " out of range for function of dimension " +
                std::to_string(f.weights.size()));
    }
    z += f.weights[i];
  }
  return truth_sigmoid(z);
}

double truth_probability_mf(const SemanticFunction& f,
                            const MeanFieldVector& q) {
  if (f.weights.size() != q.probs.size()) {
    raise(ErrorKind::Dimension,
          "mean field vector of dimension " + std::to_string(q.probs.size()) +
              " against function of dimension " +
              std::to_string(f.weights.size()));
  }
  double z = f.bias;
  for (std::size_t i = 0; i < q.probs.size(); ++i) {
    z += f.weights[i] * q.probs[i];
  }
  return truth_sigmoid(z);
}

double situation_score(const FdsModel& model, const SituationGraph& graph,
                       std::span<const Pixie> assignment) {
  if (assignment.size() != graph.nodes().size()) {
    raise(ErrorKind::Query, "assignment covers " +
                                std::to_string(assignment.size()) +
                                " nodes, graph has " +
                                std::to_string(graph.nodes().size()));
  }
  double score = 0.0;
  for (const GraphLink& l : graph.links()) {
    const LinkMatrix& w = model.link(l.label);
    for (std::int32_t i : assignment[l.source].active) {
      for (std::int32_t j : assignment[l.target].active) {
        score += w.at(i, j);
      }
    }
  }
  return score;
}

double situation_score(
    const FdsModel& model, const SituationGraph& graph,
    const std::unordered_map<std::string, Pixie>& assignment) {
  std::vector<Pixie> ordered;
  ordered.reserve(graph.nodes().size());
  for (const GraphNode& n : graph.nodes()) {
    auto it = assignment.find(n.id);
    if (it == assignment.end()) {
      raise(ErrorKind::Query, "assignment missing node: " + n.id);
    }
    ordered.push_back(it->second);
  }
  return situation_score(model, graph, std::span<const Pixie>(ordered));
}

std::string model_to_json(const FdsModel& model) {
  json doc;
  doc["version"] = kModelVersion;
  doc["dim"] = model.config.dim;
  doc["card"] = model.config.card;
  json vocab = json::array();
  for (const VocabEntry& e : model.vocab.entries()) {
    vocab.push_back(
        {{"form", e.form}, {"role", role_name(e.role)}, {"count", e.count}});
  }
  doc["vocab"] = vocab;
  json functions = json::array();
  for (std::size_t i = 0; i < model.functions.size(); ++i) {
    functions.push_back({{"pred", model.vocab.entries()[i].form},
                         {"w", model.functions[i].weights},
                         {"b", model.functions[i].bias}});
  }
  doc["functions"] = functions;
  auto matrix_rows = [](const LinkMatrix& m) {
    json rows = json::array();
    for (int i = 0; i < m.dim(); ++i) {
      rows.push_back(std::vector<double>(m.row(i).begin(), m.row(i).end()));
    }
    return rows;
  };
  doc["links"] = {{"ARG1", matrix_rows(model.arg1)},
                  {"ARG2", matrix_rows(model.arg2)}};
  return doc.dump() + "\n";
}

void save_model(const FdsModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) raise(ErrorKind::Io, "cannot write model: " + path);
  out << model_to_json(model);
  if (!out) raise(ErrorKind::Io, "model write failed: " + path);
}

FdsModel model_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    raise(ErrorKind::Corrupt, std::string("unreadable model file: ") + e.what());
  }
  FdsModel model;
  try {
    if (!doc.contains("version")) {
      raise(ErrorKind::Corrupt, "model file has no version field");
    }
    if (!doc["version"].is_number_integer() ||
        doc["version"].get<int>() != kModelVersion) {
      raise(ErrorKind::Version,
            "unsupported model version " + doc["version"].dump() +
                " (supported: " + std::to_string(kModelVersion) + ")");
    }
    model.config.dim = doc.at("dim").get<int>();
    model.config.card = doc.at("card").get<int>();
    validate(model.config);
    for (const json& e : doc.at("vocab")) {
      std::string role = e.at("role").get<std::string>();
      if (role != "noun" && role != "verb") {
        raise(ErrorKind::Corrupt, "unknown vocabulary role: " + role);
      }
      model.vocab.add(e.at("form").get<std::string>(),
                      role == "noun" ? Role::Noun : Role::Verb,
                      e.at("count").get<std::uint64_t>());
    }
    if (doc.at("functions").size() != model.vocab.size()) {
      raise(ErrorKind::Inconsistent,
            "model file has " + std::to_string(doc.at("functions").size()) +
                " functions for " + std::to_string(model.vocab.size()) +
                " vocabulary entries");
    }
    std::size_t at = 0;
    for (const json& f : doc.at("functions")) {
      std::string pred = f.at("pred").get<std::string>();
      if (pred != model.vocab.entries()[at].form) {
        raise(ErrorKind::Inconsistent,
              "function " + std::to_string(at) + " is for '" + pred +
                  "' but vocabulary entry is '" +
                  model.vocab.entries()[at].form + "'");
      }
      SemanticFunction fn;
      fn.weights = f.at("w").get<std::vector<double>>();
      fn.bias = f.at("b").get<double>();
      model.functions.push_back(std::move(fn));
      ++at;
    }
    auto load_matrix = [&](const char* key, LinkLabel label) {
      LinkMatrix m(label, model.config.dim);
      const json& rows = doc.at("links").at(key);
      if (static_cast<int>(rows.size()) != model.config.dim) {
        raise(ErrorKind::Inconsistent,
              std::string(key) + " matrix has wrong row count");
      }
      for (int i = 0; i < model.config.dim; ++i) {
        std::vector<double> row = rows[i].get<std::vector<double>>();
        if (static_cast<int>(row.size()) != model.config.dim) {
          raise(ErrorKind::Inconsistent,
                std::string(key) + " matrix row " + std::to_string(i) +
                    " has wrong length");
        }
        for (int j = 0; j < model.config.dim; ++j) m.at(i, j) = row[j];
      }
      return m;
    };
    model.arg1 = load_matrix("ARG1", LinkLabel::Arg1);
    model.arg2 = load_matrix("ARG2", LinkLabel::Arg2);
  } catch (const json::exception& e) {
    raise(ErrorKind::Corrupt, std::string("unreadable model file: ") + e.what());
  }
  validate(model);
  return model;
}

FdsModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrorKind::Io, "cannot open model: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return model_from_json(buf.str());
}

}  // namespace fds
