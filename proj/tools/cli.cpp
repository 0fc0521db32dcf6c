#include "cli.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "iclap/codebook.hpp"
#include "iclap/error.hpp"
#include "iclap/numfmt.hpp"
#include "iclap/recognition.hpp"
#include "iclap/synth.hpp"
#include "iclap/touch_io.hpp"

namespace iclap::cli {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

constexpr const char* kToolVersion = "iclap 1.0.0";

struct MissingInput : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct MissingFlag : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

std::string_view command_name(Command c) {
  switch (c) {
    case Command::Synth: return "synth";
    case Command::Dictionary: return "dictionary";
    case Command::Models: return "models";
    case Command::Classify: return "classify";
    case Command::Evaluate: return "evaluate";
  }
  return "?";
}

void require_file(const fs::path& p, std::string_view flag) {
  if (p.empty()) throw MissingFlag(std::string(flag) + " is required");
  if (!fs::is_regular_file(p)) throw MissingInput("no such file: " + p.string());
}

void require_dir(const fs::path& p, std::string_view flag) {
  if (p.empty()) throw MissingFlag(std::string(flag) + " is required");
  if (!fs::is_directory(p)) throw MissingInput("no such directory: " + p.string());
}

void require_dataset(const fs::path& root) {
  require_dir(root, "--data");
  if (!fs::is_regular_file(root / "objects.txt")) throw MissingInput("no objects.txt under " + root.string());
}

std::vector<Method> methods_of(const std::string& name) {
  if (name == "all") return {Method::Iclap, Method::Icp3, Method::Bow};
  return {method_from_string(name)};
}

DescriptorConfig descriptor_of(const RunConfig& c) {
  DescriptorConfig cfg;
  cfg.kind = c.kind;
  cfg.zernike_max_order = c.order;
  return cfg;
}

// The codebook carries the descriptor kind and length; the Zernike order is
// recovered from the length.
DescriptorConfig descriptor_of(const Codebook& cb) {
  DescriptorConfig cfg;
  cfg.kind = cb.descriptor_kind();
  if (cfg.kind == DescriptorKind::ZernikeMoments) {
    int order = 0;
    while (zernike_length(order) < cb.dim()) ++order;
    if (zernike_length(order) != cb.dim()) throw ArgumentError("codebook length matches no Zernike order");
    cfg.zernike_max_order = order;
  }
  if (descriptor_length(cfg) != cb.dim()) throw ArgumentError("codebook length does not match its descriptor kind");
  return cfg;
}

// Files that make up a dataset, relative to its root, in a stable order.
std::vector<fs::path> dataset_files(const fs::path& root) {
  std::vector<fs::path> files{"objects.txt"};
  std::vector<fs::path> touches;
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (entry.is_regular_file() && entry.path().extension() == ".touches") {
      touches.push_back(fs::relative(entry.path(), root));
    }
  }
  std::sort(touches.begin(), touches.end());
  files.insert(files.end(), touches.begin(), touches.end());
  return files;
}

json hash_entry(const fs::path& shown, const fs::path& actual) {
  return json{{"path", shown.generic_string()}, {"sha256", sha256_hex(read_text_file(actual))}};
}

json hash_dataset(const fs::path& root) {
  json out = json::array();
  for (const auto& rel : dataset_files(root)) out.push_back(hash_entry(root / rel, root / rel));
  return out;
}

json hash_models(const fs::path& dir) {
  json out = json::array();
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && (entry.path().extension() == ".model" || entry.path().filename() == "models.txt")) {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) out.push_back(hash_entry(f, f));
  return out;
}

json config_echo(const RunConfig& c) {
  json j;
  j["command"] = command_name(c.command);
  switch (c.command) {
    case Command::Synth:
      j["objects"] = c.objects;
      j["explorations"] = c.explorations;
      j["touches"] = c.touches;
      j["position_noise"] = c.position_noise;
      j["pressure_noise"] = c.pressure_noise;
      break;
    case Command::Dictionary:
      j["data"] = c.dataset_root.generic_string();
      j["kind"] = to_string(c.kind);
      j["order"] = c.order;
      j["k"] = c.k;
      j["kmeans_iters"] = c.kmeans_iters;
      j["standardize"] = c.standardize;
      break;
    case Command::Models:
      j["data"] = c.dataset_root.generic_string();
      j["codebook"] = c.codebook_path.generic_string();
      j["w_scale"] = c.w_scale;
      break;
    case Command::Classify:
    case Command::Evaluate:
      if (c.command == Command::Classify) {
        j["models"] = c.models_dir.generic_string();
        j["codebook"] = c.codebook_path.generic_string();
        j["test"] = c.test_path.generic_string();
      } else {
        j["data"] = c.dataset_root.generic_string();
        j["kind"] = to_string(c.kind);
        j["order"] = c.order;
        j["k"] = c.k;
        j["kmeans_iters"] = c.kmeans_iters;
        j["standardize"] = c.standardize;
        j["w_scale"] = c.w_scale;
        j["m"] = parse_m_range(c.m_range);
        j["trials"] = c.trials;
        j["sanity"] = c.sanity;
        j["subset"] = c.prefix ? "prefix" : "random";
      }
      j["method"] = c.method;
      j["icp"] = json{{"max_iters", c.icp.max_iters},
                      {"abs_tolerance", c.icp.abs_tolerance},
                      {"rel_change_threshold", c.icp.rel_change_threshold},
                      {"init", c.icp.init_mode == InitMode::Identity ? "identity" : "centroid"}};
      break;
  }
  j["output"] = c.output.generic_string();
  return j;
}

void write_manifest(const fs::path& path, const RunConfig& c, json inputs, const std::vector<fs::path>& outputs) {
  json m;
  m["tool"] = kToolVersion;
  m["config"] = config_echo(c);
  m["seed"] = c.seed;
  m["inputs"] = std::move(inputs);
  json outs = json::array();
  for (const auto& o : outputs) outs.push_back(hash_entry(o, o));
  m["outputs"] = std::move(outs);
  write_file_atomic(path, m.dump(2) + "\n");
}

fs::path sibling_manifest(const fs::path& output) {
  fs::path p = output;
  p += ".manifest.json";
  return p;
}

int run_synth(const RunConfig& c, std::ostream& out) {
  synth::BenchmarkOptions opts;
  opts.twenty_objects = c.objects == 20;
  opts.explorations = c.explorations;
  opts.touches = c.touches;
  opts.position_noise = c.position_noise;
  opts.pressure_noise = c.pressure_noise;
  const Dataset ds = synth::standard_benchmark(c.seed, opts);
  save_dataset(ds, c.output);
  std::vector<fs::path> outputs;
  for (const auto& rel : dataset_files(c.output)) outputs.push_back(c.output / rel);
  write_manifest(c.output / "manifest.json", c, json::array(), outputs);
  out << "wrote " << ds.objects.size() << " objects to " << c.output.string() << "\n";
  return kExitOk;
}

int run_dictionary(const RunConfig& c, std::ostream& out) {
  require_dataset(c.dataset_root);
  const Dataset ds = load_dataset(c.dataset_root);
  const DescriptorConfig cfg = descriptor_of(c);
  std::vector<std::vector<double>> descriptors;
  std::size_t skipped = 0;
  for (const auto& obj : ds.objects) {
    for (const auto& ex : obj.explorations) {
      const DescribedExploration d = describe_exploration(ex, cfg);
      skipped += d.skipped;
      for (const auto& e : d.entries) descriptors.push_back(e.descriptor.values);
    }
  }
  KMeansOptions km;
  km.k = c.k;
  km.seed = c.seed;
  km.max_iters = c.kmeans_iters;
  km.standardize = c.standardize;
  km.kind = c.kind;
  const KMeansFit fit = kmeans_fit(descriptors, km);
  write_file_atomic(c.output, serialize_codebook(fit.codebook));
  write_manifest(sibling_manifest(c.output), c, hash_dataset(c.dataset_root), {c.output});
  out << "codebook k=" << fit.codebook.k() << " from " << descriptors.size() << " descriptors (" << skipped
      << " blank frames skipped), " << fit.iterations << " iterations\n";
  return kExitOk;
}

int run_models(const RunConfig& c, std::ostream& out) {
  require_dataset(c.dataset_root);
  require_file(c.codebook_path, "--codebook");
  const Dataset ds = load_dataset(c.dataset_root);
  const Codebook cb = parse_codebook(read_text_file(c.codebook_path));
  const DescriptorConfig cfg = descriptor_of(cb);
  std::string index;
  std::vector<fs::path> outputs;
  for (const auto& obj : ds.objects) {
    const ObjectModel model = build_model(obj.explorations, cb, cfg, c.w_scale);
    const fs::path file = c.output / (obj.object_id + ".model");
    write_file_atomic(file, serialize_model(model));
    outputs.push_back(file);
    index += obj.object_id + "\n";
  }
  write_file_atomic(c.output / "models.txt", index);
  outputs.push_back(c.output / "models.txt");
  json inputs = hash_dataset(c.dataset_root);
  inputs.push_back(hash_entry(c.codebook_path, c.codebook_path));
  write_manifest(c.output / "manifest.json", c, std::move(inputs), outputs);
  out << "wrote " << ds.objects.size() << " models to " << c.output.string() << "\n";
  return kExitOk;
}

std::vector<ObjectModel> load_models(const fs::path& dir) {
  if (!fs::is_regular_file(dir / "models.txt")) throw MissingInput("no models.txt under " + dir.string());
  std::vector<ObjectModel> models;
  std::istringstream index(read_text_file(dir / "models.txt"));
  std::string id;
  while (std::getline(index, id)) {
    if (id.empty()) continue;
    const fs::path file = dir / (id + ".model");
    if (!fs::is_regular_file(file)) throw MissingInput("no such file: " + file.string());
    try {
      models.push_back(parse_model(read_text_file(file)));
    } catch (const ParseError& e) {
      throw ParseError(e.line(), e.detail(), file.string());
    }
  }
  if (models.empty()) throw ModelError("models.txt lists no models");
  return models;
}

std::string format_report(const ClassificationReport& r) {
  std::string s = "method " + std::string(to_string(r.method)) + "\nwinner " + r.winner + "\nskipped " +
                  std::to_string(r.skipped_samples) + "\n";
  for (std::size_t i = 0; i < r.ranked.size(); ++i) {
    const auto& m = r.ranked[i];
    s += std::to_string(i + 1) + " " + m.object_id + " " + format_double(m.raw_error) + " " +
         format_double(m.normalized_score) + "\n";
  }
  return s;
}

int run_classify(const RunConfig& c, std::ostream& out) {
  require_dir(c.models_dir, "--models");
  require_file(c.codebook_path, "--codebook");
  require_file(c.test_path, "--test");
  const std::vector<ObjectModel> models = load_models(c.models_dir);
  const Codebook cb = parse_codebook(read_text_file(c.codebook_path));
  const DescriptorConfig cfg = descriptor_of(cb);
  Exploration test = [&] {
    try {
      return parse_exploration(read_text_file(c.test_path));
    } catch (const ParseError& e) {
      throw ParseError(e.line(), e.detail(), c.test_path.string());
    }
  }();
  const double w_scale = models.front().w_scale();
  for (const auto& m : models) {
    if (m.w_scale() != w_scale) throw ModelError("models were built with different w_scale values");
  }

  std::string text;
  for (Method method : methods_of(c.method)) {
    ClassificationReport r;
    switch (method) {
      case Method::Iclap: r = classify_iclap(test.samples(), models, cb, cfg, w_scale, c.icp); break;
      case Method::Icp3: r = classify_icp3(test.samples(), models, c.icp); break;
      case Method::Bow: r = classify_bow(test.samples(), models, cb, cfg); break;
    }
    text += format_report(r);
  }
  if (c.output.empty()) {
    out << text;
  } else {
    write_file_atomic(c.output, text);
    json inputs = hash_models(c.models_dir);
    inputs.push_back(hash_entry(c.codebook_path, c.codebook_path));
    inputs.push_back(hash_entry(c.test_path, c.test_path));
    write_manifest(sibling_manifest(c.output), c, std::move(inputs), {c.output});
    out << "wrote " << c.output.string() << "\n";
  }
  return kExitOk;
}

int run_evaluate(const RunConfig& c, std::ostream& out) {
  require_dataset(c.dataset_root);
  const Dataset ds = load_dataset(c.dataset_root);
  EvalOptions opts;
  opts.methods = methods_of(c.method);
  opts.touches = parse_m_range(c.m_range);
  opts.trials = c.trials;
  opts.seed = c.seed;
  opts.codebook.k = c.k;
  opts.codebook.max_iters = c.kmeans_iters;
  opts.codebook.standardize = c.standardize;
  opts.codebook.kind = c.kind;
  opts.descriptor = descriptor_of(c);
  opts.w_scale = c.w_scale;
  opts.icp = c.icp;
  opts.subset = c.prefix ? SubsetMode::Prefix : SubsetMode::Random;
  opts.sanity = c.sanity;
  const SweepResult result = evaluate_touch_sweep(ds, opts);

  std::string table = "# method m rate trials\n";
  for (const auto& curve : result.curves) table += serialize_curve(curve);
  std::vector<fs::path> outputs;
  if (c.output.empty()) {
    out << table;
  } else {
    write_file_atomic(c.output, table);
    outputs.push_back(c.output);
  }
  if (!c.confusion_output.empty()) {
    write_file_atomic(c.confusion_output, serialize_confusion(result));
    outputs.push_back(c.confusion_output);
  }
  if (!outputs.empty()) {
    write_manifest(sibling_manifest(outputs.front()), c, hash_dataset(c.dataset_root), outputs);
    out << "wrote " << c.output.string() << "\n";
  }
  for (const auto& curve : result.curves) {
    for (std::size_t i = 0; i < curve.touches.size(); ++i) {
      if (curve.clipped[i] > 0) {
        out << "note: " << to_string(curve.method) << " m=" << curve.touches[i] << " clipped in " << curve.clipped[i]
            << " draws\n";
      }
    }
  }
  return kExitOk;
}

}  // namespace

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 failed");
  }
  static constexpr char hex[] = "0123456789abcdef";
  std::string s;
  for (unsigned int i = 0; i < len; ++i) {
    s += hex[digest[i] >> 4];
    s += hex[digest[i] & 0xf];
  }
  return s;
}

std::vector<int> parse_m_range(const std::string& text) {
  std::vector<int> ms;
  auto one = [&](std::string_view tok) {
    long long v = 0;
    if (!parse_int(tok, v) || v <= 0 || v > 1000000) throw ArgumentError("bad touch count '" + std::string(tok) + "'");
    return static_cast<int>(v);
  };
  const auto dots = text.find("..");
  if (dots != std::string::npos) {
    const int lo = one(std::string_view(text).substr(0, dots));
    const int hi = one(std::string_view(text).substr(dots + 2));
    if (lo > hi) throw ArgumentError("empty touch range '" + text + "'");
    for (int m = lo; m <= hi; ++m) ms.push_back(m);
    return ms;
  }
  std::string_view rest = text;
  while (true) {
    const auto comma = rest.find(',');
    ms.push_back(one(rest.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    rest.remove_prefix(comma + 1);
  }
  return ms;
}

void validate(const RunConfig& c) {
  auto positive = [](double v, const char* flag) {
    if (!std::isfinite(v) || v <= 0.0) throw ArgumentError(std::string(flag) + " must be positive");
  };
  auto non_negative = [](double v, const char* flag) {
    if (!std::isfinite(v) || v < 0.0) throw ArgumentError(std::string(flag) + " must be >= 0");
  };
  if (c.output.empty() && (c.command == Command::Synth || c.command == Command::Dictionary ||
                           c.command == Command::Models)) {
    throw ArgumentError("--out is required");
  }
  switch (c.command) {
    case Command::Synth:
      if (c.objects != 10 && c.objects != 20) throw ArgumentError("--objects must be 10 or 20");
      positive(c.explorations, "--explorations");
      positive(c.touches, "--touches");
      non_negative(c.position_noise, "--position-noise");
      non_negative(c.pressure_noise, "--pressure-noise");
      return;
    case Command::Models:
      non_negative(c.w_scale, "--w-scale");
      return;
    case Command::Dictionary:
    case Command::Evaluate:
      if (c.order < 0) throw ArgumentError("--order must be >= 0");
      positive(c.k, "--k");
      non_negative(c.kmeans_iters, "--kmeans-iters");
      if (c.command == Command::Dictionary) return;
      non_negative(c.w_scale, "--w-scale");
      positive(c.trials, "--trials");
      parse_m_range(c.m_range);
      break;
    case Command::Classify:
      break;
  }
  methods_of(c.method);
  c.icp.validate();
}

int run(const RunConfig& config, std::ostream& out, std::ostream& err) {
  try {
    validate(config);
  } catch (const std::exception& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  }
  try {
    switch (config.command) {
      case Command::Synth: return run_synth(config, out);
      case Command::Dictionary: return run_dictionary(config, out);
      case Command::Models: return run_models(config, out);
      case Command::Classify: return run_classify(config, out);
      case Command::Evaluate: return run_evaluate(config, out);
    }
  } catch (const MissingFlag& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const MissingInput& e) {
    err << "missing input: " << e.what() << "\n";
    return kExitMissingInput;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitPipeline;
  }
  return kExitPipeline;
}

int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Tactile object recognition with labeled point clouds"};
  app.require_subcommand(1);
  RunConfig c;
  std::string kind = "zernike";
  bool identity_init = false;

  auto add_descriptor = [&](CLI::App* sub) {
    sub->add_option("--kind", kind, "Descriptor: raw, hu or zernike");
    sub->add_option("--order", c.order, "Zernike maximum order");
    sub->add_option("--k", c.k, "Codebook size");
    sub->add_option("--kmeans-iters", c.kmeans_iters, "Lloyd iteration cap");
    sub->add_flag("--standardize", c.standardize, "Standardize descriptors before clustering");
  };
  auto add_icp = [&](CLI::App* sub) {
    sub->add_option("--method", c.method, "iclap, icp3, bow or all");
    sub->add_option("--max-iters", c.icp.max_iters, "ICP iteration cap");
    sub->add_option("--abs-tol", c.icp.abs_tolerance, "ICP absolute error tolerance");
    sub->add_option("--rel-change", c.icp.rel_change_threshold, "ICP relative change threshold");
    sub->add_flag("--identity-init", identity_init, "Start ICP from the identity instead of centroid alignment");
  };

  auto* synth_cmd = app.add_subcommand("synth", "Generate the synthetic benchmark dataset");
  synth_cmd->add_option("--seed", c.seed, "Generation seed");
  synth_cmd->add_option("--out", c.output, "Dataset directory to write");
  synth_cmd->add_option("--objects", c.objects, "10 or 20");
  synth_cmd->add_option("--explorations", c.explorations, "Explorations per object");
  synth_cmd->add_option("--touches", c.touches, "Touches per exploration");
  synth_cmd->add_option("--position-noise", c.position_noise, "Position noise sigma (mm)");
  synth_cmd->add_option("--pressure-noise", c.pressure_noise, "Pressure noise sigma");

  auto* dict_cmd = app.add_subcommand("dictionary", "Fit a codebook over every exploration of a dataset");
  dict_cmd->add_option("--data", c.dataset_root, "Dataset directory");
  dict_cmd->add_option("--seed", c.seed, "k-means seed");
  dict_cmd->add_option("--out", c.output, "Codebook file to write");
  add_descriptor(dict_cmd);

  auto* models_cmd = app.add_subcommand("models", "Build one reference model per object");
  models_cmd->add_option("--data", c.dataset_root, "Dataset directory");
  models_cmd->add_option("--codebook", c.codebook_path, "Codebook file");
  models_cmd->add_option("--w-scale", c.w_scale, "Scale of the label coordinate");
  models_cmd->add_option("--out", c.output, "Model directory to write");

  auto* classify_cmd = app.add_subcommand("classify", "Classify one touch file against saved models");
  classify_cmd->add_option("--models", c.models_dir, "Model directory");
  classify_cmd->add_option("--codebook", c.codebook_path, "Codebook file");
  classify_cmd->add_option("--test", c.test_path, "Touch file to classify");
  classify_cmd->add_option("--out", c.output, "Report file (stdout if omitted)");
  add_icp(classify_cmd);

  auto* eval_cmd = app.add_subcommand("evaluate", "Leave-one-exploration-out touch sweep");
  eval_cmd->add_option("--data", c.dataset_root, "Dataset directory");
  eval_cmd->add_option("--seed", c.seed, "Evaluation seed");
  eval_cmd->add_option("--m", c.m_range, "Touch counts: a..b, a,b,c or a");
  eval_cmd->add_option("--trials", c.trials, "Random subsets per object, fold and m");
  eval_cmd->add_option("--w-scale", c.w_scale, "Scale of the label coordinate");
  eval_cmd->add_option("--out", c.output, "Curve table file (stdout if omitted)");
  eval_cmd->add_option("--confusion", c.confusion_output, "Confusion matrix file");
  eval_cmd->add_flag("--sanity", c.sanity, "Test each object with its own training samples");
  eval_cmd->add_flag("--prefix", c.prefix, "Take the first m touches instead of random subsets");
  add_descriptor(eval_cmd);
  add_icp(eval_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n" << app.help();
    return kExitUsage;
  }

  if (synth_cmd->parsed()) c.command = Command::Synth;
  if (dict_cmd->parsed()) c.command = Command::Dictionary;
  if (models_cmd->parsed()) c.command = Command::Models;
  if (classify_cmd->parsed()) c.command = Command::Classify;
  if (eval_cmd->parsed()) c.command = Command::Evaluate;
  try {
    c.kind = descriptor_kind_from_string(kind);
  } catch (const ArgumentError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  }
  if (identity_init) c.icp.init_mode = InitMode::Identity;
  return run(c, out, err);
}

}  // namespace iclap::cli
