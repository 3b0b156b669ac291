#include "cli.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "tsimg/data_io.hpp"
#include "tsimg/error.hpp"
#include "tsimg/sweeps.hpp"

namespace tsimg::cli {

namespace {

namespace fs = std::filesystem;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::uint64_t default_seed() {
  const char* env = std::getenv("TSIMG_SEED");
  if (env == nullptr || *env == '\0') return 0;
  std::uint64_t seed = 0;
  const char* end = env + std::char_traits<char>::length(env);
  const auto [ptr, ec] = std::from_chars(env, end, seed);
  if (ec != std::errc() || ptr != end) throw UsageError(std::string("TSIMG_SEED is not an unsigned integer: ") + env);
  return seed;
}

std::vector<std::string> names_of(auto&& values) {
  std::vector<std::string> out;
  for (auto v : values) out.emplace_back(to_string(v));
  return out;
}

// ---------------------------------------------------------------- options

struct DataOptions {
  std::string input;
  std::string format = "ett_csv";
  std::vector<std::string> columns;
  std::string label_column;
  int variates = 1;
  std::string synthetic;
  int period = 24;
  int length = 2000;
  double noise = 0.0;
  double phi = 0.9;
  double train_ratio = 0.7;
  double val_ratio = 0.1;
  double test_ratio = 0.2;

  SplitRatios ratios() const { return {train_ratio, val_ratio, test_ratio}; }
};

void add_data_options(CLI::App* app, DataOptions& d) {
  auto* input = app->add_option("--input", d.input, "Dataset file");
  app->add_option("--format", d.format, "Dataset layout")
      ->check(CLI::IsMember({"ett_csv", "labeled_windows_csv"}));
  app->add_option("--columns", d.columns, "Variate columns to keep (ETT header names)")->delimiter(',');
  app->add_option("--label-column", d.label_column, "Label column name (labeled windows; default last)");
  app->add_option("--variates", d.variates, "Variates per labeled-window row")->check(CLI::PositiveNumber);
  auto* synthetic = app->add_option("--synthetic", d.synthetic, "Generate data instead of reading --input")
                        ->check(CLI::IsMember({"sine", "sawtooth", "composite", "ar1"}));
  input->excludes(synthetic);
  app->add_option("--period", d.period, "Synthetic period")->check(CLI::PositiveNumber);
  app->add_option("--length", d.length, "Synthetic length")->check(CLI::PositiveNumber);
  app->add_option("--noise", d.noise, "Synthetic Gaussian noise std")->check(CLI::NonNegativeNumber);
  app->add_option("--phi", d.phi, "AR(1) coefficient");
  app->add_option("--train-ratio", d.train_ratio, "Chronological train fraction");
  app->add_option("--val-ratio", d.val_ratio, "Chronological validation fraction");
  app->add_option("--test-ratio", d.test_ratio, "Chronological test fraction");
}

struct ImagingCli {
  std::string method = "uvh";
  int L = 0;
  int rp_dim = 1;
  int rp_delay = 1;
  int stft_window = 64;
  int stft_hop = 0;
  int scales = 32;
  int filters = 32;
  int plot_height = 64;
  int plot_width = 64;
  int thickness = 1;

  ImagingOptions resolve() const {
    ImagingOptions o;
    o.method = *parse_imaging_method(method);
    o.uvh_period = L;
    o.rp_embed_dim = rp_dim;
    o.rp_delay = rp_delay;
    o.stft_window = stft_window;
    o.stft_hop = stft_hop;
    o.wavelet_scales = scales;
    o.filterbank_filters = filters;
    o.lineplot_height = plot_height;
    o.lineplot_width = plot_width;
    o.lineplot_thickness = thickness;
    return o;
  }
};

void add_imaging_options(CLI::App* app, ImagingCli& im, const std::string& method_flag) {
  app->add_option(method_flag, im.method, "Imaging method")
      ->check(CLI::IsMember(names_of(kAllImagingMethods)));
  app->add_option("--L", im.L, "UVH segment length (0: detect by FFT)")->check(CLI::NonNegativeNumber);
  app->add_option("--rp-dim", im.rp_dim, "Recurrence plot embedding dimension")->check(CLI::PositiveNumber);
  app->add_option("--rp-delay", im.rp_delay, "Recurrence plot delay")->check(CLI::PositiveNumber);
  app->add_option("--stft-window", im.stft_window, "STFT window")->check(CLI::PositiveNumber);
  app->add_option("--stft-hop", im.stft_hop, "STFT hop (0: window/2)")->check(CLI::NonNegativeNumber);
  app->add_option("--scales", im.scales, "Wavelet scales")->check(CLI::PositiveNumber);
  app->add_option("--filters", im.filters, "Filterbank filters")->check(CLI::PositiveNumber);
  app->add_option("--plot-height", im.plot_height, "Line plot height")->check(CLI::PositiveNumber);
  app->add_option("--plot-width", im.plot_width, "Line plot width")->check(CLI::PositiveNumber);
  app->add_option("--thickness", im.thickness, "Line plot stroke")->check(CLI::PositiveNumber);
}

struct ModelCli {
  std::string task = "forecast-linear";
  std::string arch = "lvm2attn";
  ImagingCli imaging;
  int lookback = 96;
  int horizon = 96;
  int stride = 1;
  int eval_stride = 1;
  int image_size = 64;
  int patch_size = 8;
  int embed_dim = 64;
  int heads = 4;
  int mlp_ratio = 2;
  double lr = 1e-4;
  int batch = 32;
  int epochs = 0;
  int patience = 0;
  bool no_early_stop = false;

  Task parsed_task() const { return *parse_task(task); }

  PipelineConfig pipeline() const {
    PipelineConfig p;
    p.model.task = parsed_task();
    p.model.arch = *parse_arch(arch);
    p.model.image_size = image_size;
    p.model.patch_size = patch_size;
    p.model.embed_dim = embed_dim;
    p.model.num_heads = heads;
    p.model.mlp_ratio = mlp_ratio;
    p.model.horizon = horizon;
    p.imaging = imaging.resolve();
    p.lookback = lookback;
    p.horizon = horizon;
    p.stride = stride;
    p.eval_stride = eval_stride;
    return p;
  }

  TrainConfig train(std::uint64_t seed) const {
    TrainConfig t = TrainConfig::for_task(parsed_task());
    t.learning_rate = lr;
    t.batch_size = batch;
    if (epochs > 0) t.max_epochs = epochs;
    if (patience > 0) t.patience = patience;
    t.early_stopping = !no_early_stop;
    t.seed = seed;
    return t;
  }
};

void add_model_options(CLI::App* app, ModelCli& m) {
  app->add_option("--task", m.task, "Task head")->check(CLI::IsMember(names_of(
      std::initializer_list<Task>{Task::Classify, Task::ForecastLinear, Task::ForecastReconstruct})));
  app->add_option("--arch", m.arch, "Architecture")->check(CLI::IsMember(
      names_of(std::initializer_list<Arch>{Arch::WithoutLVM, Arch::LVM2Attn, Arch::MiniMAE})));
  add_imaging_options(app, m.imaging, "--imaging");
  app->add_option("--lookback", m.lookback, "Look-back window H")->check(CLI::PositiveNumber);
  app->add_option("--horizon", m.horizon, "Forecast horizon T'")->check(CLI::PositiveNumber);
  app->add_option("--stride", m.stride, "Training window stride")->check(CLI::PositiveNumber);
  app->add_option("--eval-stride", m.eval_stride, "Validation/test window stride")->check(CLI::PositiveNumber);
  app->add_option("--image-size", m.image_size, "Model input size S")->check(CLI::PositiveNumber);
  app->add_option("--patch-size", m.patch_size, "Patch size P")->check(CLI::PositiveNumber);
  app->add_option("--embed-dim", m.embed_dim, "Token width D")->check(CLI::PositiveNumber);
  app->add_option("--heads", m.heads, "Attention heads")->check(CLI::PositiveNumber);
  app->add_option("--mlp-ratio", m.mlp_ratio, "Feed-forward expansion (minimae)")->check(CLI::PositiveNumber);
  app->add_option("--lr", m.lr, "Adam learning rate")->check(CLI::NonNegativeNumber);
  app->add_option("--batch", m.batch, "Batch size")->check(CLI::PositiveNumber);
  app->add_option("--epochs", m.epochs, "Maximum epochs (0: task default)")->check(CLI::NonNegativeNumber);
  app->add_option("--patience", m.patience, "Early-stopping patience (0: task default)")
      ->check(CLI::NonNegativeNumber);
  app->add_flag("--no-early-stop", m.no_early_stop, "Run every epoch");
}

// ---------------------------------------------------------------- config files

std::map<std::string, std::string> read_key_values(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read config file " + path.string());
  std::map<std::string, std::string> out;
  std::string line;
  int number = 0;
  auto trim = [](std::string s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return std::string();
    return s.substr(a, s.find_last_not_of(" \t\r") - a + 1);
  };
  while (std::getline(in, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw UsageError(path.string() + ":" + std::to_string(number) + ": expected 'key = value'");
    }
    out[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return out;
}

bool has_flag(const std::vector<std::string>& args, const std::string& flag) {
  for (const std::string& a : args) {
    if (a == flag || a.rfind(flag + "=", 0) == 0) return true;
  }
  return false;
}

// Moves "--config FILE" out of `args` and appends "--key=value" for every
// file entry the command line does not already set.
std::vector<std::string> merge_config_file(std::vector<std::string> args) {
  std::optional<std::string> file;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw UsageError("--config needs a file");
      file = args[i + 1];
      args.erase(args.begin() + static_cast<long>(i), args.begin() + static_cast<long>(i) + 2);
      break;
    }
    if (args[i].rfind("--config=", 0) == 0) {
      file = args[i].substr(9);
      args.erase(args.begin() + static_cast<long>(i));
      break;
    }
  }
  if (!file) return args;
  for (const auto& [key, value] : read_key_values(*file)) {
    if (!has_flag(args, "--" + key)) args.push_back("--" + key + "=" + value);
  }
  return args;
}

std::string option_value(const CLI::Option* opt) {
  if (opt->get_expected_max() == 0) {
    return opt->count() > 0 && (opt->results().empty() || opt->results().back() != "false") ? "true" : "false";
  }
  if (opt->count() == 0) return opt->get_default_str() == "{}" ? std::string() : opt->get_default_str();
  std::string joined;
  for (const std::string& r : opt->results()) joined += (joined.empty() ? "" : ",") + r;
  return joined;
}

void write_run_config(const CLI::App* sub, std::uint64_t seed, const fs::path& path) {
  std::vector<std::pair<std::string, std::string>> entries;
  entries.emplace_back("command", sub->get_name());
  entries.emplace_back("version", TSIMG_VERSION_STRING);
  entries.emplace_back("seed", std::to_string(seed));
  for (const CLI::Option* opt : sub->get_options()) {
    if (opt->get_lnames().empty()) continue;
    const std::string& name = opt->get_lnames().front();
    if (name == "help" || name == "seed") continue;
    entries.emplace_back(name, option_value(opt));
  }
  write_key_values(entries, path);
}

// ---------------------------------------------------------------- data

MultivariateSeries load_series(const DataOptions& d, std::uint64_t seed) {
  if (!d.synthetic.empty()) {
    if (d.synthetic == "ar1") return MultivariateSeries::from_univariate(gen_ar1(d.phi, d.length, seed));
    return MultivariateSeries::from_univariate(
        gen_periodic(d.period, d.length, *parse_waveform(d.synthetic), seed, d.noise));
  }
  if (d.input.empty()) throw UsageError("--input or --synthetic is required");
  if (d.format != "ett_csv") throw UsageError("forecasting and rendering read --format ett_csv");
  DatasetManifest m;
  m.path = d.input;
  m.format = DatasetFormat::EttCsv;
  m.variate_columns = d.columns;
  m.ratios = d.ratios();
  return load_ett_csv(m);
}

struct ClassifySplits {
  std::vector<WindowSample> train, val, test;
  int num_classes = 0;
  int variates = 0;
};

ClassifySplits load_classify_splits(const DataOptions& d) {
  if (d.input.empty()) throw UsageError("classification needs --input with --format labeled_windows_csv");
  if (d.format != "labeled_windows_csv") throw UsageError("classification reads --format labeled_windows_csv");
  DatasetManifest m;
  m.path = d.input;
  m.format = DatasetFormat::LabeledWindowsCsv;
  m.label_column = d.label_column;
  m.variates = d.variates;
  m.ratios = d.ratios();
  m.validate();
  LabeledWindows data = load_labeled_windows_csv(m);
  const std::size_t n = data.samples.size();
  const auto n_train = static_cast<std::size_t>(static_cast<double>(n) * m.ratios.train);
  const auto n_val = static_cast<std::size_t>(static_cast<double>(n) * m.ratios.val);
  if (n_train < 1 || n_val < 1 || n_train + n_val >= n) {
    fail(ErrorCode::EmptyResult, std::to_string(n) + " samples cannot fill train, validation and test splits");
  }
  ClassifySplits s;
  s.num_classes = std::max(data.num_classes, 2);
  s.variates = d.variates;
  s.train.assign(data.samples.begin(), data.samples.begin() + static_cast<long>(n_train));
  s.val.assign(data.samples.begin() + static_cast<long>(n_train),
               data.samples.begin() + static_cast<long>(n_train + n_val));
  s.test.assign(data.samples.begin() + static_cast<long>(n_train + n_val), data.samples.end());
  return s;
}

ModelConfig classify_model(const ModelCli& m, const ClassifySplits& s) {
  ModelConfig model = m.pipeline().model;
  model.num_classes = s.num_classes;
  model.num_inputs = m.imaging.method == "mvh" ? 1 : s.variates;
  return model;
}

void check_routing(const ModelCli& m) {
  validate_routing(m.parsed_task(), *parse_arch(m.arch), *parse_imaging_method(m.imaging.method));
}

// ---------------------------------------------------------------- commands

struct RenderCli {
  DataOptions data;
  ImagingCli imaging;
  int variate = 0;
  int start = 0;
  int window = 0;
  std::string out;
};

int cmd_render(const RenderCli& r, const CLI::App* sub, std::uint64_t seed, std::ostream& out) {
  const MultivariateSeries series = load_series(r.data, seed);
  if (r.variate >= series.variates()) {
    throw UsageError("--variate " + std::to_string(r.variate) + " but the data has " +
                     std::to_string(series.variates()) + " variates");
  }
  if (r.start >= series.length()) throw UsageError("--start is past the end of the series");
  const int count = r.window > 0 ? r.window : series.length() - r.start;
  if (r.start + count > series.length()) throw UsageError("--start + --window exceeds the series length");
  const MultivariateSeries window = series.slice(r.start, count);
  const ImagingOptions opts = r.imaging.resolve();
  const GrayImage img = opts.method == ImagingMethod::MVH ? render(window, opts).front()
                                                          : render_univariate(window.variate(r.variate), opts);
  fs::path pgm(r.out);
  if (pgm.has_parent_path()) fs::create_directories(pgm.parent_path());
  write_pgm(img, pgm);
  fs::path sidecar = pgm;
  sidecar.replace_extension(".csv");
  write_pixels_csv(img, sidecar);
  fs::path config = pgm;
  config.replace_extension(".config.txt");
  write_run_config(sub, seed, config);
  out << "method,height,width\n" << r.imaging.method << "," << img.height() << "," << img.width() << "\n";
  return kExitOk;
}

struct TrainCli {
  DataOptions data;
  ModelCli model;
  std::string out;
};

int cmd_train(const TrainCli& t, const CLI::App* sub, std::uint64_t seed, std::ostream& out) {
  check_routing(t.model);
  const fs::path dir(t.out);
  ResultRow row{"train", "test", {}, {}, {}, {}, {}};
  TrainResult trained;
  if (t.model.parsed_task() == Task::Classify) {
    const ClassifySplits s = load_classify_splits(t.data);
    const ModelConfig model = classify_model(t.model, s);
    const ImagingOptions imaging = t.model.imaging.resolve();
    const std::vector<Example> train_ex = build_classify_examples(s.train, imaging, model.image_size, model.patch_size);
    const std::vector<Example> val_ex = build_classify_examples(s.val, imaging, model.image_size, model.patch_size);
    const std::vector<Example> test_ex = build_classify_examples(s.test, imaging, model.image_size, model.patch_size);
    trained = train(model, train_ex, val_ex, t.model.train(seed));
    row.accuracy = evaluate_accuracy(test_ex, trained.params, model);
  } else {
    const MultivariateSeries series = load_series(t.data, seed);
    ForecastExperiment exp{t.model.pipeline(), t.model.train(seed), t.data.ratios()};
    ExperimentResult r = run_forecast_experiment(series, exp);
    trained = std::move(r.trained);
    row.mse = r.test.mse;
    row.mae = r.test.mae;
  }
  fs::create_directories(dir);
  save_checkpoint(trained.params, dir / "model.ckpt");
  write_history_csv(trained.history, dir / "history.csv");
  write_run_config(sub, seed, dir / "config.txt");
  std::ofstream metrics(dir / "metrics.csv");
  write_results_csv(metrics, {row});
  write_results_csv(out, {row});
  return kExitOk;
}

struct EvalCli {
  std::string checkpoint;
  std::string split = "test";
  std::vector<std::string> perturb;
  std::string out;
};

// Rebuilds the training command's options from a run directory's config.txt.
TrainCli load_run(const fs::path& run_config, std::uint64_t& seed) {
  const auto entries = read_key_values(run_config);
  TrainCli t;
  CLI::App app("run");
  app.allow_extras();
  add_data_options(&app, t.data);
  add_model_options(&app, t.model);
  std::vector<std::string> args{"run"};
  for (const auto& [key, value] : entries) {
    if (key == "seed") {
      seed = std::stoull(value);
    } else if (key == "no-early-stop") {
      if (value == "true") args.push_back("--no-early-stop");
    } else if (key != "command" && key != "version" && key != "out" && !value.empty()) {
      args.push_back("--" + key + "=" + value);
    }
  }
  std::vector<const char*> argv;
  for (const std::string& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    throw UsageError(run_config.string() + ": " + e.what());
  }
  return t;
}

int cmd_eval(const EvalCli& e, std::uint64_t perturb_seed, std::ostream& out) {
  const fs::path ckpt(e.checkpoint);
  std::uint64_t seed = 0;
  const TrainCli run = load_run(ckpt.parent_path() / "config.txt", seed);
  const ParamSet params = load_checkpoint(ckpt);
  std::vector<PerturbMode> modes;
  std::string label;
  for (const std::string& p : e.perturb) {
    modes.push_back({*parse_perturb_kind(p), perturb_seed});
    label += (label.empty() ? "" : "+") + p;
  }

  std::vector<ResultRow> rows;
  if (run.model.parsed_task() == Task::Classify) {
    const ClassifySplits s = load_classify_splits(run.data);
    const ModelConfig model = classify_model(run.model, s);
    const ImagingOptions imaging = run.model.imaging.resolve();
    const auto& samples = e.split == "train" ? s.train : e.split == "val" ? s.val : s.test;
    const double clean = evaluate_accuracy(
        build_classify_examples(samples, imaging, model.image_size, model.patch_size), params, model);
    rows.push_back({"clean", e.split, {}, {}, clean, {}, {}});
    if (!modes.empty()) {
      const double pert = evaluate_accuracy(
          build_classify_examples(samples, imaging, model.image_size, model.patch_size, modes), params, model);
      rows.push_back({"perturbed:" + label, e.split, {}, {}, pert, {}, {}});
      rows.push_back({"drop_pct:" + label, e.split, {}, {}, performance_drop(clean, pert, Better::Higher), {}, {}});
    }
  } else {
    const MultivariateSeries series = load_series(run.data, seed);
    const StandardizedSplits splits = prepare_forecast_splits(series, run.data.ratios(), run.model.lookback);
    const MultivariateSeries& part = e.split == "train" ? splits.train : e.split == "val" ? splits.val : splits.test;
    PipelineConfig pipe = run.model.pipeline();
    pipe.model = resolve_forecast_model(pipe, series.variates());
    const ForecastMetrics clean =
        evaluate_forecast(build_forecast_items(part, pipe, pipe.eval_stride), params, pipe.model);
    rows.push_back({"clean", e.split, clean.mse, clean.mae, {}, {}, {}});
    if (!modes.empty()) {
      const ForecastMetrics pert =
          evaluate_forecast(build_forecast_items(part, pipe, pipe.eval_stride, modes), params, pipe.model);
      rows.push_back({"perturbed:" + label, e.split, pert.mse, pert.mae, {}, {}, {}});
      rows.push_back({"drop_pct:" + label, e.split, performance_drop(clean.mse, pert.mse, Better::Lower),
                      performance_drop(clean.mae, pert.mae, Better::Lower), {}, {}, {}});
    }
  }
  if (!e.out.empty()) {
    std::ofstream file(e.out);
    if (!file) fail(ErrorCode::IoError, "cannot write " + e.out);
    write_results_csv(file, rows);
  }
  write_results_csv(out, rows);
  return kExitOk;
}

struct SweepCli {
  std::string kind;
  DataOptions data;
  ModelCli model;
  int k = 6;
  int i_max = 12;
  std::vector<int> i_values;
  std::vector<int> lengths;
  int jobs = 1;
  bool timing = false;
  std::string out;
};

int cmd_sweep(const SweepCli& s, const CLI::App* sub, std::uint64_t seed, std::ostream& out, std::ostream& err) {
  check_routing(s.model);
  if (s.model.parsed_task() == Task::Classify) throw UsageError("sweeps run forecasting tasks");
  const MultivariateSeries series = load_series(s.data, seed);
  const ForecastExperiment exp{s.model.pipeline(), s.model.train(seed), s.data.ratios()};
  SweepResult result;
  if (s.kind == "segment") {
    if (s.model.imaging.method != "uvh") throw UsageError("segment sweeps use --imaging uvh");
    int L = s.model.imaging.L;
    if (L == 0) {
      const auto train_len = static_cast<int>(static_cast<double>(series.length()) * s.data.train_ratio);
      L = detect_period(series.slice(0, train_len).variate(0)).chosen_L;
      err << "detected L = " << L << "\n";
    }
    std::vector<int> is = s.i_values;
    if (is.empty()) {
      for (int i = 1; i <= s.i_max; ++i) is.push_back(i);
    }
    result = segment_sweep(series, exp, L, s.k, is, s.jobs);
  } else {
    std::vector<int> lengths = s.lengths;
    if (lengths.empty()) lengths.assign(std::begin(kDefaultLookbacks), std::end(kDefaultLookbacks));
    result = lookback_sweep(series, exp, lengths, s.jobs);
  }

  std::vector<ResultRow> rows;
  for (const SweepPoint& p : result.points) {
    ResultRow row{result.kind, std::to_string(p.axis), p.mse, p.mae, {}, {}, {}};
    if (s.kind == "segment") row.n_value = p.n_value;
    if (s.timing) row.seconds = p.seconds;
    rows.push_back(row);
  }
  for (const SweepPoint& p : result.points) {
    ResultRow row{result.kind + "-normalized", std::to_string(p.axis), p.normalized_mse, {}, {}, {}, {}};
    if (s.kind == "segment") row.n_value = p.n_value;
    rows.push_back(row);
  }

  const fs::path dir(s.out);
  fs::create_directories(dir);
  std::ofstream csv(dir / "results.csv");
  write_results_csv(csv, rows);
  csv.close();
  std::vector<std::pair<std::string, std::string>> summary;
  if (result.zero_length_mse) {
    summary.emplace_back("zero_length_mse", format_double(*result.zero_length_mse));
    summary.emplace_back("zero_length_normalized", format_double(*result.zero_length_normalized));
  }
  for (const SweepSkip& skip : result.skipped) {
    summary.emplace_back("skipped_" + std::to_string(skip.axis), skip.reason);
    err << "skipped " << skip.axis << ": " << skip.reason << "\n";
  }
  write_key_values(summary, dir / "summary.txt");
  write_run_config(sub, seed, dir / "config.txt");
  write_results_csv(out, rows);
  return kExitOk;
}

struct LemmaCli {
  int k = 6;
  int k_max = 0;
  int i_max = 12;
};

int cmd_lemma(const LemmaCli& l, std::ostream& out, std::ostream& err) {
  out << "k,i,L,n_closed_form,n_brute_force,match\n";
  bool all = true;
  const int k_first = l.k_max > 0 ? 1 : l.k;
  const int k_last = l.k_max > 0 ? l.k_max : l.k;
  for (int k = k_first; k <= k_last; ++k) {
    const int L = brute_force_period(k);
    std::string curve;
    for (int i = 1; i <= l.i_max; ++i) {
      const int closed = reoccurrence_n(i, k);
      const int brute = reoccurrence_brute_force(i, k, L);
      all = all && closed == brute;
      out << k << "," << i << "," << L << "," << closed << "," << brute << "," << (closed == brute ? 1 : 0) << "\n";
      curve += (curve.empty() ? "" : ",") + std::to_string(closed);
    }
    err << "k=" << k << " n-curve: [" << curve << "]\n";
  }
  if (!all) {
    err << "closed form and simulation disagree\n";
    return kExitRuntime;
  }
  return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);

  CLI::App app("Time series imaging toolkit", "tsimg");
  app.set_version_flag("--version", TSIMG_VERSION_STRING);
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();
  app.add_option("--config", "Line-oriented 'key = value' file; flags override it");
  std::uint64_t seed = 0;

  RenderCli render_cli;
  CLI::App* render = app.add_subcommand("render", "Image one series window and write PGM + pixel CSV");
  add_data_options(render, render_cli.data);
  add_imaging_options(render, render_cli.imaging, "--method");
  render->add_option("--variate", render_cli.variate, "Variate index")->check(CLI::NonNegativeNumber);
  render->add_option("--start", render_cli.start, "First time step")->check(CLI::NonNegativeNumber);
  render->add_option("--window", render_cli.window, "Steps to image (0: to the end)")->check(CLI::NonNegativeNumber);
  render->add_option("--out", render_cli.out, "Output .pgm path")->required();

  TrainCli train_cli;
  CLI::App* train_cmd = app.add_subcommand("train", "Train a model and write checkpoint, history and config");
  add_data_options(train_cmd, train_cli.data);
  add_model_options(train_cmd, train_cli.model);
  train_cmd->add_option("--out", train_cli.out, "Run directory")->required();

  EvalCli eval_cli;
  CLI::App* eval = app.add_subcommand("eval", "Score a checkpoint on a split, optionally perturbed");
  eval->add_option("--checkpoint", eval_cli.checkpoint, "model.ckpt inside a train run directory")
      ->required()
      ->check(CLI::ExistingFile);
  eval->add_option("--split", eval_cli.split, "Split to score")->check(CLI::IsMember({"train", "val", "test"}));
  eval->add_option("--perturb", eval_cli.perturb, "Perturbations applied in order")
      ->delimiter(',')
      ->check(CLI::IsMember(names_of(std::initializer_list<PerturbKind>{
          PerturbKind::SfAll, PerturbKind::SfHalf, PerturbKind::ExHalf, PerturbKind::Masking})));
  eval->add_option("--out", eval_cli.out, "Also write the metrics CSV here");

  SweepCli sweep_cli;
  CLI::App* sweep = app.add_subcommand("sweep", "Segment-length or look-back sweep");
  sweep->add_option("--kind", sweep_cli.kind, "Sweep axis")->required()->check(CLI::IsMember({"segment", "lookback"}));
  add_data_options(sweep, sweep_cli.data);
  add_model_options(sweep, sweep_cli.model);
  sweep->add_option("--k", sweep_cli.k, "Segment lengths are (i/k) L")->check(CLI::PositiveNumber);
  sweep->add_option("--i-max", sweep_cli.i_max, "Sweep i = 1..i-max")->check(CLI::PositiveNumber);
  sweep->add_option("--i", sweep_cli.i_values, "Explicit i values")->delimiter(',')->check(CLI::PositiveNumber);
  sweep->add_option("--lengths", sweep_cli.lengths, "Look-back lengths")->delimiter(',')->check(CLI::PositiveNumber);
  sweep->add_option("--jobs", sweep_cli.jobs, "Worker threads")->check(CLI::PositiveNumber);
  sweep->add_flag("--timing", sweep_cli.timing, "Fill the seconds column (output no longer byte-stable)");
  sweep->add_option("--out", sweep_cli.out, "Output directory")->required();

  LemmaCli lemma_cli;
  CLI::App* lemma = app.add_subcommand("lemma", "Check n = k / gcd(i, k) against simulation");
  lemma->add_option("--k", lemma_cli.k, "Segment denominator")->check(CLI::PositiveNumber);
  lemma->add_option("--k-max", lemma_cli.k_max, "Check every k = 1..k-max instead")->check(CLI::NonNegativeNumber);
  lemma->add_option("--i-max", lemma_cli.i_max, "Check i = 1..i-max")->check(CLI::PositiveNumber);

  for (CLI::App* sub : {render, train_cmd, eval, sweep}) {
    sub->add_option("--seed", seed, "Base seed (default: TSIMG_SEED or 0)");
  }

  try {
    args = merge_config_file(std::move(args));
    seed = default_seed();
    std::vector<const char*> cargv{"tsimg"};
    for (const std::string& a : args) cargv.push_back(a.c_str());
    try {
      app.parse(static_cast<int>(cargv.size()), cargv.data());
    } catch (const CLI::ParseError& e) {
      const int code = app.exit(e, out, err);
      return code == 0 ? kExitOk : kExitUsage;
    }
    if (render->parsed()) return cmd_render(render_cli, render, seed, out);
    if (train_cmd->parsed()) return cmd_train(train_cli, train_cmd, seed, out);
    if (eval->parsed()) return cmd_eval(eval_cli, seed, out);
    if (sweep->parsed()) return cmd_sweep(sweep_cli, sweep, seed, out, err);
    if (lemma->parsed()) return cmd_lemma(lemma_cli, out, err);
    return kExitUsage;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    if (e.code() == ErrorCode::RoutingError) {
      err << "routing error: " << e.what() << "\n";
      return kExitUsage;
    }
    err << "error (" << to_string(e.code()) << "): " << e.what() << "\n";
    return kExitRuntime;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

}  // namespace tsimg::cli
