// revdetect: corpus ingestion, marker extraction, training, evaluation,
// evidence indexing, analysis and the HTTP service.

#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "revdetect/features.hpp"
#include "revdetect/revdetect.hpp"
#include "revdetect/service.hpp"

namespace fs = std::filesystem;
using namespace revdetect;
using nlohmann::json;

namespace {

constexpr int kExitError = 1;
constexpr int kExitUnreadable = 2;
constexpr int kExitSingleClass = 3;

struct ExitCode {
  int code;
  std::string message;
};

struct Globals {
  std::string config_path;
  std::uint64_t seed = 42;
  bool json_out = false;
  json config = json::object();
};

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw ExitCode{kExitUnreadable, "cannot read '" + p.string() + "'"};
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ServiceConfig service_config(const Globals& g) {
  return service_config_from_json(g.config);
}

Lexicon lexicon_for(const Globals& g, const std::string& override_path) {
  if (!override_path.empty()) return load_lexicon(override_path);
  if (g.config.contains("lexicon") && g.config["lexicon"].is_string()) return load_lexicon(g.config["lexicon"].get<std::string>());
  return default_lexicon();
}

std::optional<LlmConfig> llm_config(const Globals& g) { return service_config(g).llm; }

// A dataset CSV or a feature table; datasets are scored with the rule-based extractor.
std::vector<FeatureRecord> load_features_any(const fs::path& path, const Lexicon& lex) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ExitCode{kExitUnreadable, "cannot read '" + path.string() + "'"};
  std::string first;
  std::getline(in, first);
  if (!first.empty() && first.back() == '\r') first.pop_back();
  in.clear();
  in.seekg(0);
  try {
    std::istringstream header_line(first + "\n");
    const auto hdr = csv::read_records(header_line);
    if (!hdr.empty() && is_feature_header(hdr.front().fields)) return load_features_csv(in);
    const auto data = load_dataset_csv(in);
    std::vector<FeatureRecord> rows;
    for (const auto& r : data.reviews) rows.push_back({r.id, r.label, extract_rule_based(r.text, lex), Provenance::Rule});
    return rows;
  } catch (const Error& e) {
    throw ExitCode{kExitUnreadable, path.string() + ": " + e.what()};
  }
}

void print_json(const json& j) { std::cout << j.dump(2) << "\n"; }

std::string fmt4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

void print_eval_table(const EvalReport& r) {
  std::cout << "accuracy   " << fmt4(r.accuracy) << "\n"
            << "precision  " << fmt4(r.precision) << "\n"
            << "recall     " << fmt4(r.recall) << "\n"
            << "f1         " << fmt4(r.f1) << "\n"
            << "auc_roc    " << fmt4(r.auc_roc) << "\n"
            << "fpr        " << fmt4(r.fpr) << "\n"
            << "fnr        " << fmt4(r.fnr) << "\n"
            << "confusion  TP=" << r.confusion.tp << " FP=" << r.confusion.fp << " FN=" << r.confusion.fn
            << " TN=" << r.confusion.tn << "\n";
  if (r.degenerate) std::cout << "note: at least one ratio had a zero denominator\n";
}

// --- ingest ----------------------------------------------------------------

struct IngestArgs {
  std::vector<std::string> peerread;
  std::string source = "PeerRead-ICLR";
  std::vector<std::string> merge;
  std::string out;
};

int run_ingest(const Globals& g, const IngestArgs& a) {
  auto src = parse_source(a.source);
  if (!src) throw ExitCode{kExitError, "unknown source '" + a.source + "'"};
  Dataset data;
  data.seed = g.seed;
  std::vector<fs::path> files;
  for (const auto& p : a.peerread) {
    if (fs::is_directory(p)) {
      for (const auto& e : fs::recursive_directory_iterator(p))
        if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
    } else {
      files.emplace_back(p);
    }
  }
  std::sort(files.begin(), files.end());
  std::size_t skipped = 0;
  for (const auto& f : files) {
    try {
      for (auto& r : parse_peerread_file(read_file(f), *src, "peerread-" + f.stem().string()))
        data.reviews.push_back(std::move(r));
    } catch (const Error& e) {
      ++skipped;
      std::cerr << "skipping " << f << ": " << e.what() << "\n";
    }
  }
  for (const auto& m : a.merge) {
    try {
      auto extra = load_dataset_csv(fs::path(m));
      for (auto& r : extra.reviews) data.reviews.push_back(std::move(r));
    } catch (const Error& e) {
      throw ExitCode{kExitUnreadable, m + ": " + e.what()};
    }
  }
  check_unique_ids(data);
  write_dataset_csv(data, fs::path(a.out));
  std::size_t human = 0, ai = 0;
  for (const auto& r : data.reviews)
    if (r.label) (*r.label == Label::Human ? human : ai) += 1;
  if (g.json_out)
    print_json({{"reviews", data.size()}, {"human", human}, {"ai", ai}, {"files", files.size()}, {"skipped", skipped}});
  else
    std::cout << "wrote " << data.size() << " reviews (" << human << " Human, " << ai << " AI-Generated) to " << a.out
              << "\n";
  return 0;
}

// --- extract ---------------------------------------------------------------

struct ExtractArgs {
  std::string dataset;
  std::string out;
  std::string extractor = "rule";
  std::string checkpoint;
  std::string lexicon;
  std::size_t workers = 10;
  std::size_t every = 50;
};

int run_extract(const Globals& g, const ExtractArgs& a) {
  Dataset data;
  try {
    data = load_dataset_csv(fs::path(a.dataset));
  } catch (const Error& e) {
    throw ExitCode{kExitUnreadable, a.dataset + ": " + e.what()};
  }
  const auto lex = lexicon_for(g, a.lexicon);
  ClientFactory factory;
  if (a.extractor == "llm") {
    auto cfg = llm_config(g);
    if (!cfg) throw ExitCode{kExitError, "--extractor llm needs an `llm` block in the config file"};
    factory = make_llm_factory(*cfg);
  } else if (a.extractor != "rule") {
    throw ExitCode{kExitError, "extractor must be rule or llm"};
  }
  BatchOptions opt;
  opt.workers = a.workers;
  opt.checkpoint_every = a.every;
  if (!a.checkpoint.empty()) opt.checkpoint_path = a.checkpoint;
  const auto res = extract_batch(data.reviews, lex, factory, opt);
  for (const auto& w : res.warnings) std::cerr << "warning: " << w << "\n";
  std::vector<FeatureRecord> rows;
  for (const auto& r : data.reviews) {
    const auto& e = res.markers.at(r.id);
    rows.push_back({r.id, r.label, e.markers, e.provenance});
  }
  write_features_csv(rows, fs::path(a.out));
  if (g.json_out)
    print_json({{"rows", rows.size()}, {"resumed", res.resumed}, {"extracted", res.extracted}, {"warnings", res.warnings}});
  else
    std::cout << "wrote " << rows.size() << " feature rows to " << a.out << " (" << res.resumed << " resumed)\n";
  return 0;
}

// --- train -----------------------------------------------------------------

struct TrainArgs {
  std::string input;
  std::string family = "boosted";
  std::string out;
  std::string cv_out;
  std::string lexicon;
  std::size_t folds = 5;
  std::size_t threads = 1;
};

int run_train(const Globals& g, const TrainArgs& a) {
  const auto lex = lexicon_for(g, a.lexicon);
  const auto rows = load_features_any(a.input, lex);
  TrainingSet t;
  try {
    t = to_training_set(rows);
  } catch (const DataError& e) {
    throw ExitCode{kExitUnreadable, e.what()};
  }
  const auto n_ai = static_cast<std::size_t>(std::count(t.y.begin(), t.y.end(), 1));
  if (t.y.empty() || n_ai == 0 || n_ai == t.y.size())
    throw ExitCode{kExitSingleClass, "training data must contain both Human and AI-Generated reviews"};

  const auto family = parse_family(a.family);
  const auto grid = default_grid(family);
  const auto search = grid_search(family, grid, t.X, t.y, a.folds, g.seed, a.threads);
  const double w_pos = compute_class_weight(t.y);
  auto model = fit_family(t.X, t.y, search.best_params(), family, w_pos, g.seed);
  model.training = {{"folds", a.folds},
                    {"grid_size", grid.size()},
                    {"cv_mean_auc", search.best_auc()},
                    {"rows", t.y.size()},
                    {"selected_cell", search.best}};
  save_model(model, fs::path(a.out));

  std::ostringstream table;
  table << "cell,params,mean_auc";
  for (std::size_t f = 0; f < a.folds; ++f) table << ",fold" << f + 1;
  table << "\n";
  for (std::size_t c = 0; c < search.cells.size(); ++c) {
    const auto& cell = search.cells[c];
    table << c << ',' << csv::quote(cell.params.dump()) << ',' << fmt4(cell.mean_auc);
    for (double v : cell.fold_auc) table << ',' << fmt4(v);
    table << "\n";
  }
  if (!a.cv_out.empty()) {
    std::ofstream cv(a.cv_out, std::ios::binary);
    if (!cv) throw ExitCode{kExitError, "cannot write '" + a.cv_out + "'"};
    cv << table.str();
  }
  if (g.json_out) {
    json cells = json::array();
    for (const auto& c : search.cells) cells.push_back({{"params", c.params}, {"mean_auc", c.mean_auc}, {"fold_auc", c.fold_auc}});
    print_json({{"model", a.out},
                {"family", std::string(to_string(model.kind))},
                {"best", search.best_params()},
                {"cv_mean_auc", search.best_auc()},
                {"class_weight", w_pos},
                {"cells", cells}});
  } else {
    std::cout << table.str() << "best cell " << search.best << ": " << search.best_params().dump()
              << " mean AUC " << fmt4(search.best_auc()) << "\nmodel written to " << a.out << "\n";
  }
  return 0;
}

// --- evaluate --------------------------------------------------------------

struct EvaluateArgs {
  std::string model;
  std::string input;
  std::string confusion_file;
  std::string lexicon;
};

Confusion read_confusion_file(const std::string& path) {
  const auto raw = read_file(path);
  try {
    const auto j = json::parse(raw);
    return {j.at("tp").get<std::size_t>(), j.at("fp").get<std::size_t>(), j.at("fn").get<std::size_t>(),
            j.at("tn").get<std::size_t>()};
  } catch (const json::exception&) {
  }
  std::istringstream in(raw);
  auto recs = csv::read_records(in);
  for (const auto& r : recs) {
    if (r.fields.size() != 4) continue;
    try {
      return {std::stoul(r.fields[0]), std::stoul(r.fields[1]), std::stoul(r.fields[2]), std::stoul(r.fields[3])};
    } catch (const std::exception&) {
    }
  }
  throw ExitCode{kExitUnreadable, path + ": expected {tp,fp,fn,tn} JSON or a tp,fp,fn,tn CSV row"};
}

int run_evaluate(const Globals& g, const EvaluateArgs& a) {
  EvalReport report;
  if (!a.confusion_file.empty()) {
    report = evaluate_confusion(read_confusion_file(a.confusion_file));
  } else {
    if (a.model.empty() || a.input.empty()) throw ExitCode{kExitError, "evaluate needs --model and a dataset"};
    const auto model = load_model(fs::path(a.model));
    const auto rows = load_features_any(a.input, lexicon_for(g, a.lexicon));
    const auto t = to_training_set(rows);
    if (t.y.empty()) throw ExitCode{kExitError, "empty test set"};
    std::vector<double> p(t.X.size());
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = model.predict_proba(t.X[i]).ai;
    report = evaluate_scores(t.y, p);
  }
  if (g.json_out) print_json(to_json(report));
  else print_eval_table(report);
  return 0;
}

// --- build-index / retrieval-eval ------------------------------------------

struct IndexArgs {
  std::string dataset;
  std::string out;
};

int run_build_index(const Globals& g, const IndexArgs& a) {
  Dataset data;
  try {
    data = load_dataset_csv(fs::path(a.dataset));
  } catch (const Error& e) {
    throw ExitCode{kExitUnreadable, a.dataset + ": " + e.what()};
  }
  auto encoder = make_encoder(service_config(g).encoder);
  const auto index = build_index(data, *encoder);
  save_index(index, fs::path(a.out));
  if (g.json_out) print_json({{"index", a.out}, {"size", index.size()}, {"encoder", index.encoder_tag()}});
  else std::cout << "indexed " << index.size() << " reviews with " << index.encoder_tag() << " to " << a.out << "\n";
  return 0;
}

struct RetrievalEvalArgs {
  std::string index;
  std::string dataset;
  std::size_t per_class = 100;
  std::size_t k = 5;
};

int run_retrieval_eval(const Globals& g, const RetrievalEvalArgs& a) {
  const auto index = load_index(fs::path(a.index));
  Dataset data;
  try {
    data = load_dataset_csv(fs::path(a.dataset));
  } catch (const Error& e) {
    throw ExitCode{kExitUnreadable, a.dataset + ": " + e.what()};
  }
  auto encoder = make_encoder(service_config(g).encoder);
  const auto q = sample_queries(data, a.per_class, g.seed);
  const auto ev = evaluate_retrieval(index, *encoder, q.human, q.ai, a.k);
  if (g.json_out) {
    print_json(to_json(ev));
    return 0;
  }
  auto row = [](const char* name, const ClassRetrievalStats& s) {
    std::cout << name << "  queries=" << s.queries << "  top1_acc=" << fmt4(s.top1_accuracy)
              << "  same=" << fmt4(s.avg_same_class) << "  cross=" << fmt4(s.avg_cross_class)
              << "  sim_topk=" << fmt4(s.mean_topk_similarity) << "  sim_top1=" << fmt4(s.mean_top1_similarity) << "\n";
  };
  row("Human", ev.human);
  row("AI   ", ev.ai);
  return 0;
}

// --- analyze / serve -------------------------------------------------------

struct AnalyzeArgs {
  std::string text;
  std::string file;
  std::string model;
  std::string index;
  std::string extractor = "auto";
  std::size_t k = kReportNeighbors;
  bool no_evidence = false;
};

std::unique_ptr<Engine> engine_for(const Globals& g, const std::string& model, const std::string& index,
                                   bool want_index) {
  auto cfg = service_config(g);
  if (!model.empty()) cfg.model_path = model;
  if (!index.empty()) cfg.index_path = index;
  if (!want_index) cfg.index_path.reset();
  if (cfg.model_path.empty()) throw ExitCode{kExitError, "no model given (--model or config `model`)"};
  auto m = load_model(cfg.model_path);
  auto lex = cfg.lexicon_path ? load_lexicon(*cfg.lexicon_path) : default_lexicon();
  std::optional<EvidenceIndex> idx;
  if (cfg.index_path) idx = load_index(*cfg.index_path);
  return std::make_unique<Engine>(std::move(m), std::move(lex), std::move(idx), make_encoder(cfg.encoder), cfg.llm,
                                  cfg.llm_workers);
}

int run_analyze(const Globals& g, const AnalyzeArgs& a) {
  std::string text = a.text;
  if (!a.file.empty()) text = read_file(a.file);
  if (text.empty()) throw ExitCode{kExitError, "give the review with --text or --file"};
  const auto engine = engine_for(g, a.model, a.index, !a.no_evidence);
  const auto report = engine->analyze(text, parse_extractor_preference(a.extractor), a.k, a.no_evidence);
  std::cout << (g.json_out ? render_json(report) : render_text(report));
  return 0;
}

std::atomic<bool> g_stop{false};
extern "C" void on_signal(int) { g_stop = true; }

struct ServeArgs {
  std::string model;
  std::string index;
  std::string host;
  int port = -1;
};

int run_serve(const Globals& g, const ServeArgs& a) {
  auto cfg = service_config(g);
  const auto engine = engine_for(g, a.model, a.index, true);
  Service service(*engine, cfg.body_limit);
  const auto host = a.host.empty() ? cfg.host : a.host;
  const int port = service.bind(host, a.port >= 0 ? a.port : cfg.port);
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  std::cerr << "serving on http://" << host << ":" << port << "\n";
  std::jthread watcher([&](std::stop_token st) {
    while (!g_stop && !st.stop_requested()) std::this_thread::sleep_for(std::chrono::milliseconds(100));
    service.stop();
  });
  service.run();
  watcher.request_stop();
  std::cerr << "stopped\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Explainable detection of AI-generated peer reviews"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config_path, "JSON config file (default: $REVDETECT_CONFIG)");
  app.add_option("--seed", g.seed, "Random seed")->capture_default_str();
  app.add_flag("--json", g.json_out, "Machine-readable JSON output");

  IngestArgs ingest;
  auto* c_ingest = app.add_subcommand("ingest", "Build a dataset CSV from PeerRead files and existing CSVs");
  c_ingest->add_option("--peerread", ingest.peerread, "PeerRead review JSON files or directories");
  c_ingest->add_option("--source", ingest.source, "Source tag for PeerRead reviews")->capture_default_str();
  c_ingest->add_option("--merge", ingest.merge, "Dataset CSVs to append (e.g. generated reviews)");
  c_ingest->add_option("-o,--out", ingest.out, "Output dataset CSV")->required();

  ExtractArgs extract;
  auto* c_extract = app.add_subcommand("extract", "Score every review on the eight markers");
  c_extract->add_option("dataset", extract.dataset, "Dataset CSV")->required();
  c_extract->add_option("-o,--out", extract.out, "Output feature CSV")->required();
  c_extract->add_option("--extractor", extract.extractor, "rule or llm")->capture_default_str();
  c_extract->add_option("--checkpoint", extract.checkpoint, "Checkpoint file for resuming");
  c_extract->add_option("--checkpoint-every", extract.every, "Reviews per checkpoint flush")->capture_default_str();
  c_extract->add_option("--workers", extract.workers, "Concurrent extraction workers")->capture_default_str();
  c_extract->add_option("--lexicon", extract.lexicon, "Lexicon file");

  TrainArgs train;
  auto* c_train = app.add_subcommand("train", "Grid-search and fit a classifier");
  c_train->add_option("input", train.input, "Feature CSV or dataset CSV")->required();
  c_train->add_option("--family", train.family, "boosted, forest or linear")->capture_default_str();
  c_train->add_option("-o,--out", train.out, "Output model file")->required();
  c_train->add_option("--cv-out", train.cv_out, "CV results table (CSV)");
  c_train->add_option("--folds", train.folds, "Cross-validation folds")->capture_default_str();
  c_train->add_option("--threads", train.threads, "Grid cells evaluated in parallel")->capture_default_str();
  c_train->add_option("--lexicon", train.lexicon, "Lexicon file (dataset input only)");

  EvaluateArgs evaluate;
  auto* c_eval = app.add_subcommand("evaluate", "Metric report for a model on labeled data");
  c_eval->add_option("input", evaluate.input, "Feature CSV or dataset CSV");
  c_eval->add_option("--model", evaluate.model, "Model file");
  c_eval->add_option("--confusion-file", evaluate.confusion_file, "Score a fixed confusion matrix instead");
  c_eval->add_option("--lexicon", evaluate.lexicon, "Lexicon file (dataset input only)");

  IndexArgs index;
  auto* c_index = app.add_subcommand("build-index", "Embed a labeled corpus into an evidence index");
  c_index->add_option("dataset", index.dataset, "Dataset CSV")->required();
  c_index->add_option("-o,--out", index.out, "Output index file")->required();

  RetrievalEvalArgs reval;
  auto* c_reval = app.add_subcommand("retrieval-eval", "Same-class retrieval statistics");
  c_reval->add_option("--index", reval.index, "Index file")->required();
  c_reval->add_option("dataset", reval.dataset, "Dataset CSV to draw queries from")->required();
  c_reval->add_option("--per-class", reval.per_class, "Queries per class")->capture_default_str();
  c_reval->add_option("-k,--top-k", reval.k, "Neighbors per query")->capture_default_str();

  AnalyzeArgs analyze;
  auto* c_analyze = app.add_subcommand("analyze", "Editor report for one review");
  auto* o_text = c_analyze->add_option("--text", analyze.text, "Review text");
  auto* o_file = c_analyze->add_option("--file", analyze.file, "File holding the review text");
  o_text->excludes(o_file);
  c_analyze->add_option("--model", analyze.model, "Model file");
  c_analyze->add_option("--index", analyze.index, "Evidence index file");
  c_analyze->add_option("--extractor", analyze.extractor, "auto, rule or llm")->capture_default_str();
  c_analyze->add_option("-k,--top-k", analyze.k, "Evidence neighbors")->capture_default_str();
  c_analyze->add_flag("--no-evidence", analyze.no_evidence, "Skip evidence retrieval");

  ServeArgs serve;
  auto* c_serve = app.add_subcommand("serve", "Run the HTTP API");
  c_serve->add_option("--model", serve.model, "Model file");
  c_serve->add_option("--index", serve.index, "Evidence index file");
  c_serve->add_option("--host", serve.host, "Bind address");
  c_serve->add_option("--port", serve.port, "Port (0 picks a free one)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (g.config_path.empty())
      if (const char* env = std::getenv("REVDETECT_CONFIG")) g.config_path = env;
    if (!g.config_path.empty()) {
      try {
        g.config = read_json_file(g.config_path);
      } catch (const Error& e) {
        throw ExitCode{kExitUnreadable, e.what()};
      }
    }
    if (*c_ingest) return run_ingest(g, ingest);
    if (*c_extract) return run_extract(g, extract);
    if (*c_train) return run_train(g, train);
    if (*c_eval) return run_evaluate(g, evaluate);
    if (*c_index) return run_build_index(g, index);
    if (*c_reval) return run_retrieval_eval(g, reval);
    if (*c_analyze) return run_analyze(g, analyze);
    if (*c_serve) return run_serve(g, serve);
  } catch (const ExitCode& e) {
    std::cerr << "error: " << e.message << "\n";
    return e.code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return 0;
}
