#include "iclap/recognition.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <numeric>
#include <string>

#include "iclap/error.hpp"
#include "iclap/numfmt.hpp"
#include "iclap/rng.hpp"

namespace iclap {

std::string_view to_string(Method method) {
  switch (method) {
    case Method::Iclap: return "iclap";
    case Method::Icp3: return "icp3";
    case Method::Bow: return "bow";
  }
  return "unknown";
}

Method method_from_string(std::string_view name) {
  if (name == "iclap") return Method::Iclap;
  if (name == "icp3" || name == "icp") return Method::Icp3;
  if (name == "bow") return Method::Bow;
  throw ArgumentError("unknown method '" + std::string(name) + "'");
}

namespace {

void check_histogram(const BowHistogram& h) {
  if (h.bins.empty()) throw ArgumentError("histogram has no bins");
  double sum = 0.0;
  for (double b : h.bins) {
    if (!std::isfinite(b) || b < 0.0) throw ArgumentError("histogram bins must be finite and non-negative");
    sum += b;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw ArgumentError("histogram bins must sum to 1");
}

std::vector<int> labels_of(std::span<const DescribedTouch> entries, const Codebook& codebook) {
  std::vector<int> labels;
  labels.reserve(entries.size());
  for (const auto& e : entries) labels.push_back(assign_label(codebook, e.descriptor.values));
  return labels;
}

Cloud labeled_cloud(std::span<const DescribedTouch> entries, std::span<const int> labels, double w_scale) {
  std::vector<LabeledPoint> pts;
  pts.reserve(entries.size());
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto& p = entries[i].position;
    pts.push_back({p[0], p[1], p[2], w_scale * labels[i]});
  }
  return Cloud::from_labeled(pts);
}

Cloud position_cloud(std::span<const DescribedTouch> entries) {
  std::vector<Position> pos;
  pos.reserve(entries.size());
  for (const auto& e : entries) pos.push_back(e.position);
  return Cloud::from_positions(pos);
}

ObjectModel model_from_entries(std::string object_id, std::span<const DescribedTouch> entries,
                               const Codebook& codebook, double w_scale) {
  if (entries.empty()) throw ModelError("object '" + object_id + "' has no usable samples");
  const std::vector<int> labels = labels_of(entries, codebook);
  return ObjectModel(std::move(object_id), labeled_cloud(entries, labels, w_scale),
                     bow_histogram(labels, codebook.k()), w_scale);
}

void require_models(std::span<const ObjectModel> models) {
  if (models.empty()) throw ArgumentError("no reference models");
}

double histogram_distance(const BowHistogram& a, const BowHistogram& b) {
  if (a.bins.size() != b.bins.size()) throw ArgumentError("histograms differ in size");
  return std::sqrt(squared_distance(a.bins, b.bins));
}

// Classification on pre-described test entries; shared by the public entry
// points and the sweep.
ClassificationReport classify_entries(Method method, std::span<const DescribedTouch> test,
                                      std::span<const ObjectModel> models, const Codebook& codebook, double w_scale,
                                      const IcpParams& params) {
  require_models(models);
  if (test.empty()) throw ArgumentError("no usable test samples");
  std::vector<double> errors(models.size());
  switch (method) {
    case Method::Iclap: {
      const Cloud cloud = labeled_cloud(test, labels_of(test, codebook), w_scale);
      for (std::size_t j = 0; j < models.size(); ++j) {
        errors[j] = icp_register(cloud, models[j].cloud4(), models[j].tree4(), params).error;
      }
      break;
    }
    case Method::Icp3: {
      const Cloud cloud = position_cloud(test);
      for (std::size_t j = 0; j < models.size(); ++j) {
        errors[j] = icp_register(cloud, models[j].cloud3(), models[j].tree3(), params).error;
      }
      break;
    }
    case Method::Bow: {
      const std::vector<int> labels = labels_of(test, codebook);
      const BowHistogram h = bow_histogram(labels, codebook.k());
      for (std::size_t j = 0; j < models.size(); ++j) errors[j] = histogram_distance(h, models[j].histogram());
      break;
    }
  }
  return rank_models(errors, models, method);
}

}  // namespace

ObjectModel::ObjectModel(std::string object_id, Cloud cloud4, BowHistogram histogram, double w_scale)
    : object_id_(std::move(object_id)),
      cloud4_(std::move(cloud4)),
      cloud3_(cloud4_.spatial()),
      histogram_(std::move(histogram)),
      w_scale_(w_scale),
      tree4_(cloud4_),
      tree3_(cloud3_) {
  if (cloud4_.dim() != 4) throw ArgumentError("object model needs a 4D cloud");
  if (object_id_.empty() || object_id_.find_first_of(" \t\r\n") != std::string::npos) {
    throw ArgumentError("object id must be a non-empty token");
  }
  check_histogram(histogram_);
  if (!std::isfinite(w_scale_) || w_scale_ < 0.0) throw ArgumentError("w_scale must be finite and non-negative");
  if (w_scale_ > 0.0) {
    const int k = static_cast<int>(histogram_.bins.size());
    std::vector<int> labels;
    for (Eigen::Index i = 0; i < cloud4_.points().cols(); ++i) {
      labels.push_back(static_cast<int>(std::lround(cloud4_.points()(3, i) / w_scale_)));
    }
    const BowHistogram derived = bow_histogram(labels, k);
    for (int j = 0; j < k; ++j) {
      if (std::abs(derived.bins[static_cast<std::size_t>(j)] - histogram_.bins[static_cast<std::size_t>(j)]) > 1e-9) {
        throw ArgumentError("histogram does not match the cloud's word labels");
      }
    }
  }
}

ObjectModel build_model(std::span<const Exploration> explorations, const Codebook& codebook,
                        const DescriptorConfig& cfg, double w_scale) {
  if (explorations.empty()) throw ArgumentError("no explorations to build a model from");
  const std::string& id = explorations.front().object_id();
  std::vector<DescribedTouch> pooled;
  for (const auto& e : explorations) {
    if (e.object_id() != id) throw ArgumentError("explorations belong to different objects");
    auto described = describe_exploration(e, cfg);
    pooled.insert(pooled.end(), std::make_move_iterator(described.entries.begin()),
                  std::make_move_iterator(described.entries.end()));
  }
  return model_from_entries(id, pooled, codebook, w_scale);
}

std::string serialize_model(const ObjectModel& model) {
  const auto& pts = model.cloud4().points();
  std::string out = "model " + model.object_id() + " points=" + std::to_string(pts.cols()) +
                    " k=" + std::to_string(model.histogram().bins.size()) +
                    " w_scale=" + format_double(model.w_scale()) + "\n";
  for (Eigen::Index i = 0; i < pts.cols(); ++i) {
    for (Eigen::Index a = 0; a < 4; ++a) {
      if (a) out += ' ';
      out += format_double(pts(a, i));
    }
    out += '\n';
  }
  out += "histogram";
  for (double b : model.histogram().bins) {
    out += ' ';
    out += format_double(b);
  }
  out += '\n';
  return out;
}

ObjectModel parse_model(std::string_view text) {
  std::vector<std::vector<std::string_view>> lines;
  std::vector<std::size_t> numbers;
  std::size_t pos = 0, line_no = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    std::vector<std::string_view> toks;
    std::size_t i = 0;
    while (i < line.size()) {
      while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
      std::size_t j = i;
      while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
      if (j > i) toks.push_back(line.substr(i, j - i));
      i = j;
    }
    if (toks.empty() || toks.front().front() == '#') continue;
    lines.push_back(std::move(toks));
    numbers.push_back(line_no);
  }
  if (lines.empty()) throw ParseError(line_no, "empty model file");

  const auto& head = lines.front();
  long long n = 0, k = 0;
  double w_scale = 0.0;
  if (head.size() != 5 || head[0] != "model" || head[2].substr(0, 7) != "points=" || head[3].substr(0, 2) != "k=" ||
      head[4].substr(0, 8) != "w_scale=" || !parse_int(head[2].substr(7), n) || !parse_int(head[3].substr(2), k) ||
      !parse_double(head[4].substr(8), w_scale) || n <= 0 || k <= 0) {
    throw ParseError(numbers.front(), "expected 'model <object_id> points=<n> k=<k> w_scale=<w>'");
  }
  if (lines.size() != static_cast<std::size_t>(n) + 2) {
    throw ParseError(numbers.back(), "expected " + std::to_string(n) + " point lines and a histogram line");
  }
  Eigen::MatrixXd pts(4, n);
  for (long long i = 0; i < n; ++i) {
    const auto& toks = lines[static_cast<std::size_t>(i) + 1];
    const std::size_t ln = numbers[static_cast<std::size_t>(i) + 1];
    if (toks.size() != 4) throw ParseError(ln, "expected 'x y z w'");
    for (int a = 0; a < 4; ++a) {
      double v = 0.0;
      if (!parse_double(toks[static_cast<std::size_t>(a)], v)) throw ParseError(ln, "non-numeric coordinate");
      pts(a, static_cast<Eigen::Index>(i)) = v;
    }
  }
  const auto& hist = lines.back();
  if (hist.size() != static_cast<std::size_t>(k) + 1 || hist[0] != "histogram") {
    throw ParseError(numbers.back(), "expected 'histogram' followed by " + std::to_string(k) + " bins");
  }
  BowHistogram h;
  for (std::size_t i = 1; i < hist.size(); ++i) {
    double v = 0.0;
    if (!parse_double(hist[i], v)) throw ParseError(numbers.back(), "non-numeric histogram bin");
    h.bins.push_back(v);
  }
  try {
    return ObjectModel(std::string(head[1]), Cloud(std::move(pts)), std::move(h), w_scale);
  } catch (const ArgumentError& e) {
    throw ParseError(numbers.front(), e.what());
  }
}

ClassificationReport rank_models(std::span<const double> raw_errors, std::span<const ObjectModel> models,
                                 Method method) {
  require_models(models);
  if (raw_errors.size() != models.size()) throw ArgumentError("one error per model expected");
  std::vector<std::size_t> order(models.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return raw_errors[a] < raw_errors[b]; });
  double sq = 0.0;
  for (double e : raw_errors) sq += e * e;
  const double norm = std::sqrt(sq);

  ClassificationReport report;
  report.method = method;
  for (std::size_t idx : order) {
    report.ranked.push_back({idx, models[idx].object_id(), raw_errors[idx], norm > 0.0 ? raw_errors[idx] / norm : 0.0});
  }
  report.winner = report.ranked.front().object_id;
  return report;
}

Cloud build_test_cloud(std::span<const TouchSample> samples, const Codebook& codebook, const DescriptorConfig& cfg,
                       double w_scale, std::size_t* skipped) {
  const DescribedExploration d = describe_samples(samples, cfg);
  if (skipped) *skipped = d.skipped;
  if (d.entries.empty()) throw ArgumentError("no usable test samples");
  return build_labeled_cloud(d.entries, codebook, w_scale);
}

ClassificationReport classify_iclap(std::span<const TouchSample> test_samples, std::span<const ObjectModel> models,
                                    const Codebook& codebook, const DescriptorConfig& cfg, double w_scale,
                                    const IcpParams& params) {
  const DescribedExploration d = describe_samples(test_samples, cfg);
  auto report = classify_entries(Method::Iclap, d.entries, models, codebook, w_scale, params);
  report.skipped_samples = d.skipped;
  return report;
}

ClassificationReport classify_icp3(std::span<const TouchSample> test_samples, std::span<const ObjectModel> models,
                                   const IcpParams& params) {
  require_models(models);
  if (test_samples.empty()) throw ArgumentError("no test samples");
  std::vector<Position> pos;
  for (const auto& s : test_samples) pos.push_back(s.position);
  const Cloud cloud = Cloud::from_positions(pos);
  std::vector<double> errors(models.size());
  for (std::size_t j = 0; j < models.size(); ++j) {
    errors[j] = icp_register(cloud, models[j].cloud3(), models[j].tree3(), params).error;
  }
  return rank_models(errors, models, Method::Icp3);
}

ClassificationReport classify_bow(std::span<const TouchSample> test_samples, std::span<const ObjectModel> models,
                                  const Codebook& codebook, const DescriptorConfig& cfg) {
  const DescribedExploration d = describe_samples(test_samples, cfg);
  auto report = classify_entries(Method::Bow, d.entries, models, codebook, 1.0, IcpParams{});
  report.skipped_samples = d.skipped;
  return report;
}

namespace {

struct FoldOutcome {
  // [method][m][true][predicted]
  std::vector<std::vector<ConfusionMatrix>> confusion;
  std::vector<std::size_t> clipped;  // per m
};

FoldOutcome run_fold(const Dataset& dataset, const std::vector<std::vector<DescribedExploration>>& described,
                     std::size_t fold, const EvalOptions& options) {
  const std::size_t n_obj = dataset.objects.size();
  std::vector<std::size_t> held(n_obj);
  for (std::size_t o = 0; o < n_obj; ++o) held[o] = fold % dataset.objects[o].explorations.size();

  std::vector<std::vector<DescribedTouch>> training(n_obj);
  std::vector<std::vector<double>> pooled;
  for (std::size_t o = 0; o < n_obj; ++o) {
    for (std::size_t e = 0; e < described[o].size(); ++e) {
      if (e == held[o]) continue;
      for (const auto& entry : described[o][e].entries) {
        training[o].push_back(entry);
        pooled.push_back(entry.descriptor.values);
      }
    }
  }

  KMeansOptions km = options.codebook;
  km.kind = options.descriptor.kind;
  km.seed = Rng{options.codebook.seed, fold}.next_u64();
  const Codebook codebook = kmeans_fit(pooled, km).codebook;

  std::vector<ObjectModel> models;
  models.reserve(n_obj);
  for (std::size_t o = 0; o < n_obj; ++o) {
    models.push_back(model_from_entries(dataset.objects[o].object_id, training[o], codebook, options.w_scale));
  }

  const std::size_t n_m = options.touches.size();
  FoldOutcome out;
  out.clipped.assign(n_m, 0);
  out.confusion.assign(options.methods.size(),
                       std::vector<ConfusionMatrix>(n_m, ConfusionMatrix(n_obj, std::vector<std::size_t>(n_obj, 0))));

  for (std::size_t o = 0; o < n_obj; ++o) {
    const std::vector<DescribedTouch>& source = options.sanity ? training[o] : described[o][held[o]].entries;
    if (source.empty()) {
      throw ArgumentError("object '" + dataset.objects[o].object_id + "' has no usable test samples");
    }
    for (std::size_t mi = 0; mi < n_m; ++mi) {
      const auto m = static_cast<std::size_t>(options.touches[mi]);
      for (int t = 0; t < options.trials; ++t) {
        std::vector<DescribedTouch> subset;
        if (options.sanity) {
          subset = source;
        } else {
          if (m > source.size()) ++out.clipped[mi];
          if (options.subset == SubsetMode::Prefix) {
            subset.assign(source.begin(), source.begin() + static_cast<std::ptrdiff_t>(std::min(m, source.size())));
          } else {
            Rng rng{options.seed, fold, o, m, static_cast<std::uint64_t>(t)};
            for (std::size_t idx : sample_without_replacement(source.size(), m, rng)) subset.push_back(source[idx]);
          }
        }
        for (std::size_t k = 0; k < options.methods.size(); ++k) {
          const auto report =
              classify_entries(options.methods[k], subset, models, codebook, options.w_scale, options.icp);
          ++out.confusion[k][mi][o][report.ranked.front().model_index];
        }
      }
    }
  }
  return out;
}

}  // namespace

SweepResult evaluate_touch_sweep(const Dataset& dataset, const EvalOptions& options) {
  if (dataset.objects.empty()) throw ArgumentError("dataset has no objects");
  if (options.methods.empty()) throw ArgumentError("no methods to evaluate");
  if (options.touches.empty()) throw ArgumentError("no touch counts to evaluate");
  if (options.trials <= 0) throw ArgumentError("trials must be positive");
  for (int m : options.touches) {
    if (m <= 0) throw ArgumentError("touch counts must be positive");
  }
  if (!std::isfinite(options.w_scale) || options.w_scale < 0.0) throw ArgumentError("w_scale must be >= 0");
  options.icp.validate();

  std::size_t folds = 0;
  std::vector<std::vector<DescribedExploration>> described(dataset.objects.size());
  for (std::size_t o = 0; o < dataset.objects.size(); ++o) {
    const auto& obj = dataset.objects[o];
    if (obj.explorations.size() < 2) {
      throw ArgumentError("object '" + obj.object_id + "' needs at least two explorations");
    }
    folds = std::max(folds, obj.explorations.size());
    for (const auto& e : obj.explorations) described[o].push_back(describe_exploration(e, options.descriptor));
  }

  std::vector<std::future<FoldOutcome>> pending;
  for (std::size_t f = 0; f < folds; ++f) {
    pending.push_back(std::async(std::launch::async, run_fold, std::cref(dataset), std::cref(described), f,
                                 std::cref(options)));
  }

  const std::size_t n_obj = dataset.objects.size();
  const std::size_t n_m = options.touches.size();
  SweepResult result;
  for (const auto& obj : dataset.objects) result.object_ids.push_back(obj.object_id);
  result.confusion.assign(options.methods.size(),
                          std::vector<ConfusionMatrix>(n_m, ConfusionMatrix(n_obj, std::vector<std::size_t>(n_obj, 0))));
  std::vector<std::size_t> clipped(n_m, 0);
  for (auto& fut : pending) {
    const FoldOutcome fold = fut.get();
    for (std::size_t k = 0; k < options.methods.size(); ++k) {
      for (std::size_t mi = 0; mi < n_m; ++mi) {
        for (std::size_t a = 0; a < n_obj; ++a) {
          for (std::size_t b = 0; b < n_obj; ++b) result.confusion[k][mi][a][b] += fold.confusion[k][mi][a][b];
        }
      }
    }
    for (std::size_t mi = 0; mi < n_m; ++mi) clipped[mi] += fold.clipped[mi];
  }

  for (std::size_t k = 0; k < options.methods.size(); ++k) {
    EvalCurve curve;
    curve.method = options.methods[k];
    curve.touches = options.touches;
    curve.trials_per_point = options.trials;
    curve.seed = options.seed;
    curve.clipped = clipped;
    for (std::size_t mi = 0; mi < n_m; ++mi) {
      std::size_t correct = 0, total = 0;
      for (std::size_t a = 0; a < n_obj; ++a) {
        correct += result.confusion[k][mi][a][a];
        for (std::size_t b = 0; b < n_obj; ++b) total += result.confusion[k][mi][a][b];
      }
      curve.rate.push_back(total ? static_cast<double>(correct) / static_cast<double>(total) : 0.0);
    }
    result.curves.push_back(std::move(curve));
  }
  return result;
}

EvalCurve evaluate_touch_sweep(const Dataset& dataset, Method method, const EvalOptions& options) {
  EvalOptions single = options;
  single.methods = {method};
  return evaluate_touch_sweep(dataset, single).curves.front();
}

std::string serialize_curve(const EvalCurve& curve) {
  std::string out;
  for (std::size_t i = 0; i < curve.touches.size(); ++i) {
    out += std::string(to_string(curve.method)) + " " + std::to_string(curve.touches[i]) + " " +
           format_double(curve.rate[i]) + " " + std::to_string(curve.trials_per_point) + "\n";
  }
  return out;
}

std::string serialize_confusion(const SweepResult& result) {
  std::string out;
  for (std::size_t k = 0; k < result.curves.size(); ++k) {
    for (std::size_t mi = 0; mi < result.curves[k].touches.size(); ++mi) {
      out += "confusion " + std::string(to_string(result.curves[k].method)) +
             " m=" + std::to_string(result.curves[k].touches[mi]) + "\n";
      for (std::size_t a = 0; a < result.object_ids.size(); ++a) {
        out += result.object_ids[a];
        for (std::size_t c : result.confusion[k][mi][a]) out += " " + std::to_string(c);
        out += '\n';
      }
    }
  }
  return out;
}

double subset_rate(const SweepResult& result, std::size_t method_index, std::size_t m_index,
                   std::span<const std::size_t> objects) {
  const ConfusionMatrix& matrix = result.confusion.at(method_index).at(m_index);
  std::size_t correct = 0, total = 0;
  for (std::size_t o : objects) {
    correct += matrix.at(o).at(o);
    for (std::size_t c : matrix.at(o)) total += c;
  }
  return total ? static_cast<double>(correct) / static_cast<double>(total) : 0.0;
}

}  // namespace iclap
