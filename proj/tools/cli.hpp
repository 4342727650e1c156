#pragma once

// The discosum command-line driver. run() parses argv, dispatches to one
// subcommand and returns the process exit code; output goes to the given
// streams so tests can call it in-process.

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "discosum/corpus.hpp"
#include "discosum/graphs.hpp"
#include "discosum/nn/checkpoint.hpp"
#include "discosum/oracle.hpp"
#include "discosum/select.hpp"
#include "discosum/train.hpp"

namespace discosum::cli {

namespace fs = std::filesystem;
using nlohmann::json;

struct RunConfig {
  std::string subcommand;
  std::string corpus, dev, test;
  std::string out;
  std::string labels, checkpoint, predictions;
  std::string embed = "lookup";
  bool lead3 = false;
  nn::ModelConfig model;
  TrainOptions train;
  std::size_t budget_edus = 6;
  std::size_t budget_tokens = 0;  // 0: no token cap
  std::string graphs = "both";

  SelectionBudget budget() const {
    SelectionBudget b;
    b.max_edus = budget_edus;
    if (budget_tokens > 0) b.max_tokens = budget_tokens;
    return b;
  }
};

inline json config_json(const RunConfig& c) {
  json j = {{"subcommand", c.subcommand}, {"seed", c.model.seed}, {"jobs", c.train.jobs}};
  auto path = [&](const char* key, const std::string& v) {
    if (!v.empty()) j[key] = v;
  };
  path("corpus", c.corpus);
  path("dev", c.dev);
  path("test", c.test);
  path("out", c.out);
  path("labels", c.labels);
  path("checkpoint", c.checkpoint);
  path("predictions", c.predictions);
  if (c.subcommand == "train") {
    j["model"] = nn::config_to_json(c.model);
    j["embed"] = c.embed;
    j["train"] = {{"steps", c.train.steps},
                  {"batch", c.train.batch_size},
                  {"lr", c.train.learning_rate},
                  {"eval_every", c.train.eval_every}};
  }
  if (c.subcommand == "train" || c.subcommand == "predict") {
    j["budget_edus"] = c.budget_edus;
    j["budget_tokens"] = c.budget_tokens;
  }
  if (c.subcommand == "predict") j["lead3"] = c.lead3;
  return j;
}

namespace detail {

inline void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << content;
}

inline fs::path prepare_out(const RunConfig& c) {
  if (c.out.empty()) throw std::runtime_error("--out is required for '" + c.subcommand + "'");
  fs::create_directories(c.out);
  write_file(fs::path(c.out) / "config.json", config_json(c).dump(2) + "\n");
  return c.out;
}

inline std::string jsonl(const std::vector<json>& rows) {
  std::string s;
  for (const auto& r : rows) s += r.dump() + "\n";
  return s;
}

inline std::string fixed(double v, int digits = 2) {
  std::ostringstream ss;
  ss << std::fixed << std::setprecision(digits) << v;
  return ss.str();
}

inline std::vector<std::vector<int>> read_labels(const std::string& path, const std::vector<Document>& docs) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("labels file '" + path + "' not found");
  std::vector<std::vector<int>> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = path + ":" + std::to_string(line_no) + ": ";
    json j;
    try {
      j = json::parse(line);
      const std::size_t k = out.size();
      if (k >= docs.size()) throw std::runtime_error(where + "more label rows than documents");
      if (j.at("id").get<std::string>() != docs[k].id)
        throw std::runtime_error(where + "id '" + j.at("id").get<std::string>() + "' does not match document '" +
                                 docs[k].id + "'");
      auto labels = j.at("labels").get<std::vector<int>>();
      if (labels.size() != docs[k].edus.size()) throw std::runtime_error(where + "label count does not match EDUs");
      out.push_back(std::move(labels));
    } catch (const json::exception& e) {
      throw std::runtime_error(where + e.what());
    }
  }
  if (out.size() != docs.size()) throw std::runtime_error(path + ": fewer label rows than documents");
  return out;
}

inline OracleLabels oracle_for(const Document& d) {
  try {
    return make_oracle_labels(d, document_dependencies(d));
  } catch (const std::exception& e) {
    throw std::runtime_error("document '" + d.id + "': " + e.what());
  }
}

inline int build_graphs(const RunConfig& c, std::ostream&) {
  const auto docs = load_corpus(c.corpus);
  const fs::path out = prepare_out(c);
  std::vector<json> rows(docs.size());
  parallel_for(docs.size(), c.train.jobs, [&](std::size_t i) {
    const DependencyTree dep = document_dependencies(docs[i]);
    const AdjacencyMatrix rst = build_rst_graph(dep);
    const AdjacencyMatrix coref = build_coref_graph(docs[i]);
    json heads = json::array();
    for (const auto& h : dep.head) heads.push_back(h ? json(*h) : json(nullptr));
    json rst_edges = json::array(), coref_edges = json::array();
    for (std::size_t a = 0; a < rst.size(); ++a)
      for (std::size_t b = 0; b < rst.size(); ++b) {
        if (rst(a, b)) rst_edges.push_back({a, b});
        if (a < b && coref(a, b)) coref_edges.push_back({a, b});
      }
    rows[i] = {{"id", docs[i].id}, {"heads", heads},          {"roots", dep.roots},
               {"rst_edges", rst_edges}, {"coref_edges", coref_edges}};
  });
  write_file(out / "graphs.jsonl", jsonl(rows));
  return 0;
}

inline int oracle(const RunConfig& c, std::ostream&) {
  const auto docs = load_corpus(c.corpus);
  const fs::path out = prepare_out(c);
  std::vector<json> rows(docs.size());
  parallel_for(docs.size(), c.train.jobs, [&](std::size_t i) {
    const OracleLabels o = oracle_for(docs[i]);
    rows[i] = {{"id", docs[i].id}, {"labels", o.labels}, {"r1", o.achieved_r1}};
  });
  write_file(out / "oracle.jsonl", jsonl(rows));
  return 0;
}

inline nn::Model<float> initial_model(const RunConfig& c, const std::vector<Document>& docs) {
  if (c.embed == "lookup") return nn::Model<float>::create(c.model, nn::Vocabulary::from_documents(docs));
  if (c.embed.rfind("file:", 0) == 0)
    return nn::Model<float>::create(c.model, nn::load_embedding_file<float>(c.embed.substr(5)));
  throw std::runtime_error("--embed must be 'lookup' or 'file:PATH', got '" + c.embed + "'");
}

inline int train(const RunConfig& c, std::ostream&) {
  const auto docs = load_corpus(c.corpus);
  const auto dev = c.dev.empty() ? std::vector<Document>{} : load_corpus(c.dev);
  std::vector<std::vector<int>> labels;
  if (!c.labels.empty()) {
    labels = read_labels(c.labels, docs);
  } else {
    labels.resize(docs.size());
    parallel_for(docs.size(), c.train.jobs, [&](std::size_t i) { labels[i] = oracle_for(docs[i]).labels; });
  }
  TrainOptions opt = c.train;
  opt.budget = c.budget();
  const fs::path out = prepare_out(c);
  const auto result = discosum::train(initial_model(c, docs), std::span<const Document>(docs),
                                      std::span<const std::vector<int>>(labels), dev, opt);
  nn::save_checkpoint((out / "model.json").string(), result.model);
  std::string log = "step\tloss\tdev_r2\n";
  for (const auto& e : result.log)
    log += std::to_string(e.step) + "\t" + fixed(e.loss, 6) + "\t" + (e.dev_r2 ? fixed(*e.dev_r2 * 100) : "") + "\n";
  write_file(out / "train_log.tsv", log);
  return 0;
}

inline int predict(const RunConfig& c, std::ostream&) {
  const auto docs = load_corpus(c.test);
  std::optional<nn::Model<float>> model;
  if (!c.lead3) {
    if (c.checkpoint.empty()) throw std::runtime_error("predict needs --checkpoint (or --lead3)");
    model = nn::load_checkpoint<float>(c.checkpoint);
  }
  const fs::path out = prepare_out(c);
  std::vector<json> rows(docs.size());
  parallel_for(docs.size(), c.train.jobs, [&](std::size_t i) {
    const Selection s = c.lead3 ? lead3(docs[i]) : predict_document(*model, docs[i], c.budget());
    rows[i] = {{"id", docs[i].id}, {"edus", s.edus}, {"summary", s.rendered}};
  });
  write_file(out / "predictions.jsonl", jsonl(rows));
  return 0;
}

inline int evaluate(const RunConfig& c, std::ostream& os) {
  const auto docs = load_corpus(c.test);
  std::ifstream in(c.predictions);
  if (!in) throw std::runtime_error("predictions file '" + c.predictions + "' not found");
  std::map<std::string, std::vector<std::string>> by_id;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      by_id[j.at("id").get<std::string>()] = j.at("summary").get<std::vector<std::string>>();
    } catch (const json::exception& e) {
      throw std::runtime_error(c.predictions + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  std::vector<std::vector<std::string>> cands, refs;
  for (const auto& d : docs) {
    auto it = by_id.find(d.id);
    if (it == by_id.end()) throw std::runtime_error("no prediction for document '" + d.id + "'");
    cands.push_back(it->second);
    refs.push_back(d.reference);
  }
  const RougeReport r = evaluate_summaries(cands, refs);
  const std::string table = "R-1\tR-2\tR-L\n" + fixed(r.r1 * 100) + "\t" + fixed(r.r2 * 100) + "\t" +
                            fixed(r.rl * 100) + "\n";
  os << table;
  if (!c.out.empty()) write_file(prepare_out(c) / "rouge.tsv", table);
  return 0;
}

inline int stats(const RunConfig& c, std::ostream& os) {
  std::string table = "corpus\tdocuments\tsentences\tedus\ttokens\trst_edges\tcoref_edges\n";
  for (const auto& [label, path] : {std::pair{"corpus", c.corpus}, {"dev", c.dev}, {"test", c.test}}) {
    if (path.empty()) continue;
    const auto docs = load_corpus(path);
    const GraphStats s = graph_stats(docs);
    table += std::string(label) + "\t" + std::to_string(s.documents) + "\t" + fixed(s.sentences) + "\t" +
             fixed(s.edus) + "\t" + fixed(s.tokens) + "\t" + fixed(s.rst_edges) + "\t" + fixed(s.coref_edges) + "\n";
  }
  os << table;
  if (!c.out.empty()) write_file(prepare_out(c) / "stats.tsv", table);
  return 0;
}

}  // namespace detail

/// Parses `argv` and runs one subcommand. Returns 0 on success; on failure
/// writes a message to `err` and returns nonzero.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  RunConfig c;
  CLI::App app{"Discourse-aware extractive summarization over EDUs", "discosum"};
  app.set_config("--config", "", "TOML/INI file of option values; command-line flags take precedence");
  app.require_subcommand(1);
  app.fallthrough();

  auto add_jobs = [&](CLI::App* s) {
    s->add_option("--jobs", c.train.jobs, "Worker threads for corpus-level work")->check(CLI::PositiveNumber);
  };
  auto add_out = [&](CLI::App* s, bool required) {
    auto* o = s->add_option("--out", c.out, "Output directory");
    if (required) o->required();
  };
  auto add_budget = [&](CLI::App* s) {
    s->add_option("--budget-edus", c.budget_edus, "Maximum EDUs per summary")->capture_default_str();
    s->add_option("--budget-tokens", c.budget_tokens, "Maximum rendered tokens per summary (0: no cap)");
  };

  auto* bg = app.add_subcommand("build-graphs", "Write dependency heads and graph edges per document");
  bg->add_option("--corpus", c.corpus, "Corpus JSONL")->required()->check(CLI::ExistingFile);
  add_out(bg, true);
  add_jobs(bg);

  auto* orc = app.add_subcommand("oracle", "Write greedy oracle labels");
  orc->add_option("--corpus", c.corpus, "Corpus JSONL")->required()->check(CLI::ExistingFile);
  add_out(orc, true);
  add_jobs(orc);

  auto* tr = app.add_subcommand("train", "Train an EDU scorer");
  tr->add_option("--corpus", c.corpus, "Training corpus JSONL")->required()->check(CLI::ExistingFile);
  tr->add_option("--dev", c.dev, "Dev corpus JSONL for model selection")->check(CLI::ExistingFile);
  tr->add_option("--labels", c.labels, "Oracle JSONL (computed when omitted)")->check(CLI::ExistingFile);
  add_out(tr, true);
  add_jobs(tr);
  tr->add_option("--seed", c.model.seed, "Seed for init, shuffling and dropout")->capture_default_str();
  tr->add_option("--layers", c.model.layers, "Graph encoder layers per graph (K)")->capture_default_str();
  tr->add_option("--hidden", c.model.hidden, "Hidden size (d_h)")->capture_default_str()->check(CLI::PositiveNumber);
  tr->add_option("--ff", c.model.feed_forward, "Feed-forward size")->capture_default_str()->check(CLI::PositiveNumber);
  tr->add_option("--dropout", c.model.dropout, "Dropout probability")->capture_default_str()->check(CLI::Range(0.0, 0.99));
  tr->add_option("--graphs", c.graphs, "Graph encoders")
      ->capture_default_str()
      ->check(CLI::IsMember({"none", "coref", "rst", "both"}));
  tr->add_flag("--rst-directed", c.model.rst_directed_messages, "RST messages from heads only");
  tr->add_option("--embed", c.embed, "lookup, or file:PATH with fixed vectors")->capture_default_str();
  tr->add_option("--steps", c.train.steps, "Optimizer steps")->capture_default_str();
  tr->add_option("--batch", c.train.batch_size, "Documents per step")->capture_default_str()->check(CLI::PositiveNumber);
  tr->add_option("--lr", c.train.learning_rate, "Adam learning rate")->capture_default_str();
  tr->add_option("--eval-every", c.train.eval_every, "Dev evaluation interval in steps")->capture_default_str();
  add_budget(tr);

  auto* pr = app.add_subcommand("predict", "Select and render summaries");
  pr->add_option("--test", c.test, "Corpus JSONL")->required()->check(CLI::ExistingFile);
  pr->add_option("--checkpoint", c.checkpoint, "Model checkpoint")->check(CLI::ExistingFile);
  pr->add_flag("--lead3", c.lead3, "Lead-3 baseline instead of a model");
  add_out(pr, true);
  add_jobs(pr);
  add_budget(pr);

  auto* ev = app.add_subcommand("evaluate", "Score predictions against references");
  ev->add_option("--test", c.test, "Corpus JSONL with references")->required()->check(CLI::ExistingFile);
  ev->add_option("--predictions", c.predictions, "Prediction JSONL")->required()->check(CLI::ExistingFile);
  add_out(ev, false);

  auto* st = app.add_subcommand("stats", "Corpus and graph statistics as TSV");
  st->add_option("--corpus", c.corpus, "Corpus JSONL")->required()->check(CLI::ExistingFile);
  st->add_option("--dev", c.dev, "Second corpus")->check(CLI::ExistingFile);
  st->add_option("--test", c.test, "Third corpus")->check(CLI::ExistingFile);
  add_out(st, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    c.subcommand = app.get_subcommands().front()->get_name();
    c.model.graphs = nn::parse_graph_mode(c.graphs);
    c.model.validate();
    err << "discosum " << c.subcommand << ": seed=" << c.model.seed << " jobs=" << c.train.jobs << "\n";
    if (c.subcommand == "build-graphs") return detail::build_graphs(c, out);
    if (c.subcommand == "oracle") return detail::oracle(c, out);
    if (c.subcommand == "train") return detail::train(c, out);
    if (c.subcommand == "predict") return detail::predict(c, out);
    if (c.subcommand == "evaluate") return detail::evaluate(c, out);
    if (c.subcommand == "stats") return detail::stats(c, out);
  } catch (const std::exception& e) {
    err << "discosum: error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

}  // namespace discosum::cli
