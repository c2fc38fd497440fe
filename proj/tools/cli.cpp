#include "cli.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "manifest.hpp"
#include "ove/checkpoint.hpp"
#include "ove/data_io.hpp"
#include "ove/errors.hpp"
#include "ove/eval.hpp"
#include "ove/full_batch.hpp"
#include "ove/nonparam.hpp"
#include "ove/objectives.hpp"
#include "ove/sgd.hpp"
#include "ove/synthetic.hpp"

#ifndef OVE_DEFAULT_DATA_DIR
#define OVE_DEFAULT_DATA_DIR "data"
#endif

namespace ove::cli {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

class Stopwatch {
 public:
  double lap_ms() {
    const auto now = std::chrono::steady_clock::now();
    const double ms = std::chrono::duration<double, std::milli>(now - last_).count();
    last_ = now;
    return ms;
  }

 private:
  std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

std::string dataset_hash(const SparseDataset& data) {
  std::ostringstream text;
  write_sparse(data, text);
  return sha256_hex(text.str());
}

fs::path prepare_out_dir(const std::string& dir) {
  fs::path p(dir);
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw DataError("cannot create output directory " + dir + ": " + ec.message());
  return p;
}

std::vector<std::int64_t> parse_counts(const std::string& text) {
  std::vector<std::int64_t> out;
  std::string_view rest = text;
  while (true) {
    const auto comma = rest.find(',');
    const auto tok = rest.substr(0, comma);
    std::int64_t v = 0;
    const auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (tok.empty() || ec != std::errc() || p != tok.data() + tok.size()) {
      throw InvalidArgument("--counts: '" + std::string(tok) + "' is not an integer");
    }
    out.push_back(v);
    if (comma == std::string_view::npos) break;
    rest = rest.substr(comma + 1);
  }
  return out;
}

// One 1-based label per line; blank and '#' lines skipped.
std::vector<int> read_label_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::vector<int> labels;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos || line[b] == '#') continue;
    const auto e = line.find_last_not_of(" \t\r");
    const std::string_view tok(line.data() + b, e - b + 1);
    int v = 0;
    const auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || p != tok.data() + tok.size() || v < 1) {
      throw DataError(path.filename().string() + ":" + std::to_string(line_no) +
                      ": expected a positive integer label");
    }
    labels.push_back(v - 1);
  }
  if (labels.empty()) throw DataError(path.string() + ": no labels");
  return labels;
}

std::string format_probs(const std::vector<double>& probs) {
  std::string s = "[";
  char buf[32];
  for (std::size_t i = 0; i < probs.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%s%.10g", i ? ", " : "", probs[i]);
    s += buf;
  }
  return s + "]";
}

// ---------------------------------------------------------------- datasets

struct DataFlags {
  std::string train_path;
  std::string test_path;
  std::string gen;  // toy, mnist, sparse
  std::string data_dir = std::string(OVE_DEFAULT_DATA_DIR) + "/mnist";
  bool multilabel = false;
  int toy_n = 200;
  SparseSynthConfig sparse;
  std::uint64_t seed = 0;

  void add_to(CLI::App* cmd, bool need_train) {
    if (need_train) cmd->add_option("--train", train_path, "Training file (sparse text format)");
    cmd->add_option("--test", test_path, "Test file (sparse text format)");
    cmd->add_option("--gen", gen, "Built-in data instead of files")
        ->check(CLI::IsMember({"toy", "mnist", "sparse"}));
    cmd->add_flag("--multilabel", multilabel, "Input files are multilabel; keep each row's first label");
    cmd->add_option("--data-dir", data_dir, "Directory holding the MNIST idx files");
    cmd->add_option("--n", toy_n, "Toy dataset size")->check(CLI::PositiveNumber);
    cmd->add_option("--K", sparse.num_classes, "Classes of the synthetic sparse generator");
    cmd->add_option("--D", sparse.num_features, "Features of the synthetic sparse generator");
    cmd->add_option("--rows", sparse.num_rows, "Rows of the synthetic sparse generator");
    cmd->add_option("--nnz", sparse.nnz_per_row, "Non-zeros per synthetic sparse row");
  }

  json to_json() const {
    json j = {{"train", train_path}, {"test", test_path}, {"gen", gen}, {"multilabel", multilabel}};
    if (gen == "toy") j["n"] = toy_n;
    if (gen == "mnist") j["data_dir"] = data_dir;
    if (gen == "sparse") {
      j["sparse"] = {{"K", sparse.num_classes},
                     {"D", sparse.num_features},
                     {"rows", sparse.num_rows},
                     {"nnz", sparse.nnz_per_row}};
    }
    return j;
  }
};

struct LoadedData {
  std::optional<SparseDataset> train;
  std::optional<SparseDataset> test;
};

SparseDataset load_file(const fs::path& path, bool multilabel, RunManifest& manifest,
                        std::ostream& err) {
  if (multilabel) {
    auto r = reduce_multilabel(path);
    if (r.dropped_rows > 0) {
      err << path.string() << ": dropped " << r.dropped_rows << " rows without labels\n";
    }
    manifest.add_dataset(path.filename().string(), path.string(), sha256_file(path));
    return std::move(r.dataset);
  }
  manifest.add_dataset(path.filename().string(), path.string(), sha256_file(path));
  return load_sparse(path);
}

SparseDataset load_mnist_split(const fs::path& dir, const std::string& prefix, RunManifest& manifest) {
  auto pick = [&](const std::string& stem) {
    for (const char* suffix : {".gz", ""}) {
      const fs::path p = dir / (stem + suffix);
      if (fs::exists(p)) return p;
    }
    throw DataError("missing MNIST file " + (dir / stem).string() + "[.gz]");
  };
  const fs::path images = pick(prefix + "-images-idx3-ubyte");
  const fs::path labels = pick(prefix + "-labels-idx1-ubyte");
  manifest.add_dataset(images.filename().string(), images.string(), sha256_file(images));
  manifest.add_dataset(labels.filename().string(), labels.string(), sha256_file(labels));
  return load_idx(images, labels, "mnist-" + prefix);
}

LoadedData load_data(const DataFlags& flags, bool need_train, RunManifest& manifest,
                     std::ostream& err) {
  LoadedData d;
  const bool has_files = !flags.train_path.empty() || !flags.test_path.empty();
  if (has_files && !flags.gen.empty()) throw InvalidArgument("use either data files or --gen, not both");
  if (flags.gen == "toy") {
    if (need_train) d.train = gen_toy_5class(flags.toy_n, flags.seed);
    d.test = gen_toy_5class(flags.toy_n, flags.seed + 1);
    d.test->set_name("toy5-test");
  } else if (flags.gen == "mnist") {
    if (need_train) d.train = load_mnist_split(flags.data_dir, "train", manifest);
    d.test = load_mnist_split(flags.data_dir, "t10k", manifest);
    const int K = std::max(d.test->num_classes(), d.train ? d.train->num_classes() : 0);
    if (d.train) d.train->reshape(d.train->num_features(), K);
    d.test->reshape(d.test->num_features(), K);
  } else if (flags.gen == "sparse") {
    // Both splits come from one draw and share the class feature pools.
    // The test split is the trailing rows/10 rows.
    SparseSynthConfig cfg = flags.sparse;
    cfg.seed = flags.seed;
    const std::size_t n_train = cfg.num_rows;
    const std::size_t n_test = std::max<std::size_t>(1, n_train / 10);
    cfg.num_rows = n_train + n_test;
    const SparseDataset all = gen_sparse_classification(cfg);
    std::vector<std::size_t> rows(n_train);
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    if (need_train) {
      d.train = all.subset(rows);
      d.train->set_name("sparse-synth-train");
    }
    rows.resize(n_test);
    std::iota(rows.begin(), rows.end(), n_train);
    d.test = all.subset(rows);
    d.test->set_name("sparse-synth-test");
  } else {
    if (need_train && flags.train_path.empty()) throw InvalidArgument("--train or --gen is required");
    if (!need_train && flags.test_path.empty()) throw InvalidArgument("--test or --gen is required");
    if (need_train && !flags.test_path.empty() && !flags.multilabel) {
      manifest.add_dataset(fs::path(flags.train_path).filename().string(), flags.train_path,
                           sha256_file(flags.train_path));
      manifest.add_dataset(fs::path(flags.test_path).filename().string(), flags.test_path,
                           sha256_file(flags.test_path));
      auto [tr, te] = load_train_test(flags.train_path, flags.test_path);
      d.train = std::move(tr);
      d.test = std::move(te);
    } else {
      if (need_train) d.train = load_file(flags.train_path, flags.multilabel, manifest, err);
      if (!flags.test_path.empty()) d.test = load_file(flags.test_path, flags.multilabel, manifest, err);
    }
    if (d.train && d.test) {
      // K and D inferred jointly so both splits agree.
      const int K = std::max(d.train->num_classes(), d.test->num_classes());
      const std::size_t D = std::max(d.train->num_features(), d.test->num_features());
      try {
        d.train->reshape(D, K);
        d.test->reshape(D, K);
      } catch (const InvalidArgument& e) {
        throw DataError(std::string("train/test shapes disagree: ") + e.what());
      }
    }
  }
  if (!flags.gen.empty()) {
    if (d.train) manifest.add_dataset(d.train->name(), "generated:" + flags.gen, dataset_hash(*d.train));
    if (flags.gen != "mnist") {
      manifest.add_dataset(d.test->name(), "generated:" + flags.gen, dataset_hash(*d.test));
    }
  }
  return d;
}

// ---------------------------------------------------------------- estimate

struct EstimateFlags {
  std::string method;
  std::string counts;
  std::string labels_path;
  std::string gen;
  int K = 1000;
  long N = 100000;
  int b = 100;
  int S = 10;
  double lr = 0.005;
  double lr_decay = 0.9;
  int epochs = 1;
  long log_interval = 1;
  std::uint64_t seed = 0;
  double tol = 1e-8;
  int max_iter = 200000;
  std::string out = "out";
};

int cmd_estimate(const EstimateFlags& f, const std::vector<std::string>& argv, std::ostream& out,
                 std::ostream& err) {
  Stopwatch clock;
  RunManifest manifest("estimate", argv);
  manifest.set_seed(f.seed);
  const EstimationMethod method = parse_estimation_method(f.method);
  const int sources = !f.counts.empty() + !f.labels_path.empty() + !f.gen.empty();
  if (sources != 1) throw InvalidArgument("give exactly one of --counts, --labels, --gen");

  std::vector<int> labels;
  std::optional<CountVector> counts;
  std::optional<std::vector<double>> true_probs;
  if (!f.counts.empty()) {
    counts.emplace(parse_counts(f.counts));
    manifest.add_dataset("counts", "argument", sha256_hex(f.counts));
  } else if (!f.labels_path.empty()) {
    labels = read_label_file(f.labels_path);
    const int max_label = *std::max_element(labels.begin(), labels.end()) + 1;
    counts.emplace(CountVector::from_labels(labels, std::max(max_label, 2)));
    manifest.add_dataset(fs::path(f.labels_path).filename().string(), f.labels_path,
                         sha256_file(f.labels_path));
  } else {
    auto sample = gen_powerlaw_categorical(f.K, f.N, f.seed);
    labels = std::move(sample.labels);
    true_probs = std::move(sample.true_probs);
    counts.emplace(CountVector::from_labels(labels, f.K));
    std::string bytes(reinterpret_cast<const char*>(labels.data()), labels.size() * sizeof(int));
    manifest.add_dataset("powerlaw", "generated:powerlaw", sha256_hex(bytes));
  }
  const int K = static_cast<int>(counts->size());

  TrainConfig cfg;
  cfg.minibatch_size = f.b;
  cfg.remaining_classes = f.S;
  cfg.epochs = f.epochs;
  cfg.lr0 = f.lr;
  cfg.lr_decay = f.lr_decay;
  cfg.seed = f.seed;
  cfg.log_interval = f.log_interval;
  FullBatchOptions fb;
  fb.gradient_tolerance = f.tol;
  fb.max_iterations = f.max_iter;

  json config = {{"method", std::string(to_string(method))}, {"K", K}, {"N", counts->total()}};
  if (method == EstimationMethod::kOveSgd) {
    config.update({{"b", f.b}, {"S", f.S}, {"lr0", f.lr}, {"lr_decay", f.lr_decay},
                   {"epochs", f.epochs}, {"log_interval", f.log_interval}});
  } else if (method != EstimationMethod::kExact) {
    config.update({{"tolerance", f.tol}, {"max_iterations", f.max_iter}});
  }
  manifest.set_config(config);
  manifest.add_timing("load", clock.lap_ms());

  const EstimationResult exact = exact_mle(*counts);
  EstimationResult result;
  switch (method) {
    case EstimationMethod::kExact: result = exact; break;
    case EstimationMethod::kOve: result = ove_fit(*counts, fb); break;
    case EstimationMethod::kBouchard: result = bouchard_fit(*counts, fb); break;
    case EstimationMethod::kOveSgd: {
      if (labels.empty()) {
        for (int k = 0; k < K; ++k) labels.insert(labels.end(), static_cast<std::size_t>((*counts)[k]), k);
      }
      result = ove_sgd_fit(labels, K, cfg, std::span<const double>(exact.probs));
      break;
    }
  }
  manifest.add_timing("fit", clock.lap_ms());

  double l1 = 0.0;
  for (int k = 0; k < K; ++k) l1 += std::abs(result.probs[k] - exact.probs[k]);

  const fs::path dir = prepare_out_dir(f.out);
  json doc = result.to_json();
  doc.erase("trace");
  doc["exact_probs"] = exact.probs;
  doc["l1_to_exact"] = l1;
  if (true_probs) doc["true_probs"] = *true_probs;
  write_json(dir / "probs.json", doc);

  std::ostringstream trace;
  trace << "iteration," << (method == EstimationMethod::kOveSgd ? "l1_error" : "objective") << '\n';
  char buf[64];
  for (const auto& p : result.trace) {
    std::snprintf(buf, sizeof(buf), "%ld,%.17g\n", p.iteration, p.value);
    trace << buf;
  }
  write_text(dir / "trace.csv", trace.str());
  manifest.add_output(dir / "probs.json");
  manifest.add_output(dir / "trace.csv");
  manifest.add_timing("write", clock.lap_ms());
  manifest.write(dir / "manifest.json");

  out << "method=" << to_string(method) << " K=" << K << " N=" << counts->total()
      << " iterations=" << result.iterations << " l1_to_exact=" << l1 << '\n';
  if (K <= 32) out << "probs=" << format_probs(result.probs) << '\n';
  if (result.alpha) out << "alpha=" << *result.alpha << '\n';
  err << "wrote " << (dir / "probs.json").string() << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------- train

struct TrainFlags {
  DataFlags data;
  std::string objective = "ove-sgd";
  double lambda = 1.0;
  int b = 1;
  int S = 1;
  int epochs = 1;
  double lr = 0.01;
  double lr_decay = 1.0;
  long log_interval = 1;
  double tol = 1e-6;
  int max_iter = 5000;
  std::string init;
  std::string checkpoint;
  bool export_json = false;
  bool trace_timing = false;
  std::string out = "out";
};

int cmd_train(TrainFlags f, const std::vector<std::string>& argv, std::ostream& out,
              std::ostream& err) {
  Stopwatch clock;
  RunManifest manifest("train", argv);
  manifest.set_seed(f.data.seed);
  const bool sgd = f.objective == "ove-sgd" || f.objective == "soft-sgd";
  const ObjectiveKind kind = f.objective == "ove-sgd"    ? ObjectiveKind::kOve
                             : f.objective == "soft-sgd" ? ObjectiveKind::kExactSoftmax
                                                         : parse_objective_kind(f.objective);
  if (!(f.lambda >= 0.0)) throw InvalidArgument("--lambda must be >= 0");

  TrainConfig cfg;
  cfg.minibatch_size = f.b;
  cfg.remaining_classes = f.S;
  cfg.epochs = f.epochs;
  cfg.lr0 = f.lr;
  cfg.lr_decay = f.lr_decay;
  cfg.lambda = f.lambda;
  cfg.seed = f.data.seed;
  cfg.objective = kind;
  cfg.log_interval = f.log_interval;
  if (sgd) cfg.validate();

  json config = {{"objective", f.objective}, {"lambda", f.lambda}, {"data", f.data.to_json()}};
  if (sgd) {
    config.update({{"b", f.b}, {"S", f.S}, {"epochs", f.epochs}, {"lr0", f.lr},
                   {"lr_decay", f.lr_decay}, {"log_interval", f.log_interval}});
  } else {
    config.update({{"tolerance", f.tol}, {"max_iterations", f.max_iter}});
  }
  if (!f.init.empty()) config["init"] = f.init;
  manifest.set_config(config);

  LoadedData data = load_data(f.data, true, manifest, err);
  const SparseDataset& train_set = *data.train;
  if (sgd) cfg.validate_for(train_set.num_classes());
  manifest.add_timing("load", clock.lap_ms());

  LinearModel init(train_set.num_classes(), train_set.num_features());
  if (!f.init.empty()) {
    init = load_checkpoint(f.init);
    if (!init.same_shape(LinearModel(train_set.num_classes(), train_set.num_features()))) {
      throw DataError("--init checkpoint shape does not match the training data");
    }
    manifest.add_dataset("init", f.init, sha256_file(f.init));
  }

  const fs::path dir = prepare_out_dir(f.out);
  const fs::path ckpt = f.checkpoint.empty() ? dir / "model.ovem" : fs::path(f.checkpoint);
  LinearModel model;
  json fit_info;
  std::ostringstream trace;
  bool converged = true;
  if (sgd) {
    TrainResult r = train(init, train_set, cfg);
    model = std::move(r.model);
    r.trace.write_csv(trace, f.trace_timing);
    fit_info = {{"steps", r.stats.steps},
                {"row_writes", r.stats.row_writes},
                {"max_rows_per_step", r.stats.max_rows_per_step}};
  } else {
    FullBatchFitOptions opts;
    opts.gradient_tolerance = f.tol;
    opts.max_iterations = f.max_iter;
    FullBatchFit fit = fit_full_batch(train_set, kind, f.lambda, opts, f.init.empty() ? nullptr : &init);
    model = std::move(fit.model);
    converged = fit.converged;
    trace << "iteration,objective\n";
    char buf[64];
    for (const auto& p : fit.trace) {
      std::snprintf(buf, sizeof(buf), "%ld,%.17g\n", p.iteration, p.value);
      trace << buf;
    }
    fit_info = {{"iterations", fit.iterations},
                {"gradient_inf_norm", fit.gradient_inf_norm},
                {"converged", fit.converged}};
  }
  manifest.add_timing("fit", clock.lap_ms());

  Objective final_objective{kind, f.lambda, {}};
  if (kind == ObjectiveKind::kBouchard) final_objective.alphas = optimize_alphas(model, train_set);
  const double bound_final = objective_value(model, train_set, final_objective);
  if (!std::isfinite(bound_final)) throw NumericalError("final objective is not finite");
  MethodReport report;
  if (data.test) {
    report = evaluate_model(f.objective, model, *data.test);
  } else {
    report = evaluate_model(f.objective, model, train_set);
  }
  report.bound_final = bound_final;
  manifest.add_timing("evaluate", clock.lap_ms());

  save_checkpoint(model, ckpt);
  json rep = report.to_json();
  rep["evaluated_on"] = data.test ? data.test->name() : train_set.name() + " (training data)";
  rep["fit"] = fit_info;
  rep["train_rows"] = train_set.size();
  rep["K"] = train_set.num_classes();
  rep["D"] = train_set.num_features();
  write_json(dir / "report.json", rep);
  write_text(dir / "trace.csv", trace.str());
  manifest.add_output(ckpt);
  manifest.add_output(dir / "report.json");
  manifest.add_output(dir / "trace.csv");
  if (f.export_json) {
    write_json(dir / "model.json", model_to_json(model));
    manifest.add_output(dir / "model.json");
  }
  manifest.add_timing("write", clock.lap_ms());
  manifest.write(dir / "manifest.json");

  out << "objective=" << f.objective << " bound_final=" << bound_final << " error=" << report.error
      << " nlpd=" << report.nlpd << '\n';
  if (!converged) {
    err << "optimizer stopped before reaching --tol " << f.tol << "; artifacts written anyway\n";
    return kExitNumerical;
  }
  return kExitOk;
}

// ---------------------------------------------------------------- compare

struct CompareFlags {
  DataFlags data;
  std::string reference;
  std::string reference_name = "soft";
  std::vector<std::string> candidates;
  std::string out = "out";
};

int cmd_compare(const CompareFlags& f, const std::vector<std::string>& argv, std::ostream& out,
                std::ostream& err) {
  Stopwatch clock;
  RunManifest manifest("compare", argv);
  manifest.set_seed(f.data.seed);
  json config = {{"reference", f.reference}, {"candidates", f.candidates}, {"data", f.data.to_json()}};
  manifest.set_config(config);

  LoadedData data = load_data(f.data, false, manifest, err);
  const SparseDataset& test = *data.test;
  const LinearModel ref = load_checkpoint(f.reference);
  manifest.add_dataset(f.reference_name, f.reference, sha256_file(f.reference));
  auto check_shape = [&](const LinearModel& m, const std::string& what) {
    if (m.num_classes() != test.num_classes() || m.num_features() < test.num_features()) {
      throw DataError(what + ": checkpoint shape (K=" + std::to_string(m.num_classes()) +
                      ", D=" + std::to_string(m.num_features()) + ") does not fit the test set");
    }
  };
  check_shape(ref, f.reference);
  const LinearModel ref_fixed = gauge_fixed(ref);

  std::vector<MethodReport> reports;
  reports.push_back(evaluate_model(f.reference_name, ref, test));
  for (const std::string& spec : f.candidates) {
    const auto eq = spec.find('=');
    const std::string name = eq == std::string::npos ? fs::path(spec).stem().string() : spec.substr(0, eq);
    const std::string path = eq == std::string::npos ? spec : spec.substr(eq + 1);
    const LinearModel cand = load_checkpoint(path);
    if (!cand.same_shape(ref)) throw DataError(path + ": checkpoint shape differs from the reference");
    check_shape(cand, path);
    manifest.add_dataset(name, path, sha256_file(path));
    MethodReport r = evaluate_model(name, cand, test);
    r.norm = param_norm(ref_fixed, gauge_fixed(cand));
    reports.push_back(std::move(r));
  }
  manifest.add_timing("evaluate", clock.lap_ms());

  const fs::path dir = prepare_out_dir(f.out);
  std::ostringstream table;
  write_report_table(reports, table);
  write_text(dir / "table.csv", table.str());
  json all = json::array();
  for (const auto& r : reports) all.push_back(r.to_json());
  write_json(dir / "reports.json", all);
  manifest.add_output(dir / "table.csv");
  manifest.add_output(dir / "reports.json");
  manifest.add_timing("write", clock.lap_ms());
  manifest.write(dir / "manifest.json");
  out << table.str();
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Softmax bounds: estimation, training and evaluation", "ove"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "ove 0.1.0");

  EstimateFlags est;
  auto* estimate = app.add_subcommand("estimate", "Estimate category probabilities from counts or labels");
  estimate->add_option("--method", est.method, "exact | ove | ove-sgd | bouchard")
      ->required()
      ->check(CLI::IsMember({"exact", "ove", "ove-sgd", "ove_sgd", "bouchard"}));
  estimate->add_option("--counts", est.counts, "Comma-separated class counts, e.g. 2,3,5");
  estimate->add_option("--labels", est.labels_path, "File with one 1-based label per line");
  estimate->add_option("--gen", est.gen, "Generate labels from p(k) ∝ u_k²")->check(CLI::IsMember({"powerlaw"}));
  estimate->add_option("--K", est.K, "Classes for --gen")->check(CLI::Range(2, 100000000));
  estimate->add_option("--N", est.N, "Samples for --gen")->check(CLI::PositiveNumber);
  estimate->add_option("--b", est.b, "Minibatch size");
  estimate->add_option("--S", est.S, "Remaining classes sampled per instance");
  estimate->add_option("--lr", est.lr, "Initial learning rate");
  estimate->add_option("--lr-decay", est.lr_decay, "Learning-rate multiplier per epoch");
  estimate->add_option("--epochs", est.epochs, "Passes over the data");
  estimate->add_option("--log-interval", est.log_interval, "Iterations between trace points");
  estimate->add_option("--tol", est.tol, "Gradient tolerance of the full-batch fits");
  estimate->add_option("--max-iter", est.max_iter, "Iteration cap of the full-batch fits");
  estimate->add_option("--seed", est.seed, "Random seed");
  estimate->add_option("--out", est.out, "Output directory");

  TrainFlags tr;
  auto* train_cmd = app.add_subcommand("train", "Train a linear softmax model");
  tr.data.add_to(train_cmd, true);
  train_cmd->add_option("--objective", tr.objective, "soft | ove | bouchard (full batch), ove-sgd | soft-sgd")
      ->check(CLI::IsMember({"soft", "ove", "bouchard", "ove-sgd", "soft-sgd"}));
  train_cmd->add_option("--lambda", tr.lambda, "L2 strength on the weights");
  train_cmd->add_option("--b", tr.b, "Minibatch size");
  train_cmd->add_option("--S", tr.S, "Remaining classes sampled per instance");
  train_cmd->add_option("--epochs", tr.epochs, "Passes over the data");
  train_cmd->add_option("--lr", tr.lr, "Initial learning rate");
  train_cmd->add_option("--lr-decay", tr.lr_decay, "Learning-rate multiplier per epoch");
  train_cmd->add_option("--log-interval", tr.log_interval, "Iterations between trace points");
  train_cmd->add_option("--tol", tr.tol, "Gradient tolerance (full batch)");
  train_cmd->add_option("--max-iter", tr.max_iter, "Iteration cap (full batch)");
  train_cmd->add_option("--seed", tr.data.seed, "Random seed");
  train_cmd->add_option("--init", tr.init, "Start from this checkpoint");
  train_cmd->add_option("--checkpoint", tr.checkpoint, "Checkpoint path (default <out>/model.ovem)");
  train_cmd->add_flag("--export-json", tr.export_json, "Also write the model as JSON");
  train_cmd->add_flag("--trace-timing", tr.trace_timing, "Add wall-clock column to the SGD trace");
  train_cmd->add_option("--out", tr.out, "Output directory");

  CompareFlags cmp;
  auto* compare = app.add_subcommand("compare", "Score checkpoints against a reference model");
  cmp.data.add_to(compare, false);
  compare->add_option("--reference", cmp.reference, "Reference checkpoint")->required();
  compare->add_option("--reference-name", cmp.reference_name, "Method tag of the reference");
  compare->add_option("--candidate", cmp.candidates, "name=checkpoint (repeatable)")->required();
  compare->add_option("--seed", cmp.data.seed, "Seed of generated test data");
  compare->add_option("--out", cmp.out, "Output directory");

  std::vector<std::string> argv = args;
  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(std::move(reversed));
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*estimate) return cmd_estimate(est, argv, out, err);
    if (*train_cmd) return cmd_train(tr, argv, out, err);
    return cmd_compare(cmp, argv, out, err);
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const fs::filesystem_error& e) {
    err << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitNumerical;
  }
}

}  // namespace ove::cli
