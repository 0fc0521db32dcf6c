#include "iclap/codebook.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <string>

#include "iclap/error.hpp"
#include "iclap/numfmt.hpp"
#include "iclap/rng.hpp"

namespace iclap {

namespace {

void check_finite(std::span<const double> v, const char* what) {
  for (double x : v) {
    if (!std::isfinite(x)) throw ArgumentError(std::string(what) + " must be finite");
  }
}

}  // namespace

Codebook::Codebook(std::vector<std::vector<double>> centroids, DescriptorKind kind, std::optional<NormStats> norm_stats)
    : centroids_(std::move(centroids)), kind_(kind), norm_stats_(std::move(norm_stats)) {
  if (centroids_.empty()) throw ArgumentError("codebook needs at least one centroid");
  const std::size_t dim = centroids_.front().size();
  if (dim == 0) throw ArgumentError("codebook centroids must be non-empty");
  for (const auto& c : centroids_) {
    if (c.size() != dim) throw ArgumentError("codebook centroids differ in length");
    check_finite(c, "centroid entries");
  }
  for (std::size_t i = 0; i < centroids_.size(); ++i) {
    for (std::size_t j = i + 1; j < centroids_.size(); ++j) {
      if (centroids_[i] == centroids_[j]) throw ArgumentError("codebook centroids must be pairwise distinct");
    }
  }
  if (norm_stats_) {
    if (norm_stats_->mean.size() != dim || norm_stats_->stddev.size() != dim) {
      throw ArgumentError("normalization statistics do not match centroid length");
    }
    check_finite(norm_stats_->mean, "normalization means");
    for (double s : norm_stats_->stddev) {
      if (!(s > 0.0) || !std::isfinite(s)) throw ArgumentError("normalization deviations must be positive");
    }
  }
}

std::vector<double> Codebook::project(std::span<const double> descriptor) const {
  if (descriptor.size() != dim()) {
    throw ArgumentError("descriptor length " + std::to_string(descriptor.size()) + " does not match codebook dim " +
                        std::to_string(dim()));
  }
  std::vector<double> out(descriptor.begin(), descriptor.end());
  if (norm_stats_) {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = (out[i] - norm_stats_->mean[i]) / norm_stats_->stddev[i];
  }
  return out;
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

namespace {

using Points = std::vector<std::vector<double>>;

// Nearest centroid (0-based) and its squared distance; lowest index on ties.
std::pair<int, double> nearest_centroid(const Points& centroids, std::span<const double> x) {
  int best = 0;
  double best_d2 = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < centroids.size(); ++j) {
    const double d2 = squared_distance(centroids[j], x);
    if (d2 < best_d2) {
      best_d2 = d2;
      best = static_cast<int>(j);
    }
  }
  return {best, best_d2};
}

std::size_t count_distinct(const Points& pts) {
  Points sorted = pts;
  std::sort(sorted.begin(), sorted.end());
  return static_cast<std::size_t>(std::unique(sorted.begin(), sorted.end()) - sorted.begin());
}

NormStats compute_norm_stats(const Points& pts) {
  const std::size_t dim = pts.front().size();
  NormStats st{std::vector<double>(dim, 0.0), std::vector<double>(dim, 0.0)};
  for (const auto& p : pts) {
    for (std::size_t d = 0; d < dim; ++d) st.mean[d] += p[d];
  }
  for (double& m : st.mean) m /= static_cast<double>(pts.size());
  for (const auto& p : pts) {
    for (std::size_t d = 0; d < dim; ++d) st.stddev[d] += (p[d] - st.mean[d]) * (p[d] - st.mean[d]);
  }
  for (double& s : st.stddev) {
    s = std::sqrt(s / static_cast<double>(pts.size()));
    if (!(s > 0.0)) s = 1.0;  // constant dimension
  }
  return st;
}

Points kmeans_plus_plus(const Points& pts, int k, Rng& rng) {
  Points centroids;
  centroids.push_back(pts[rng.below(pts.size())]);
  std::vector<double> d2(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) d2[i] = squared_distance(pts[i], centroids.front());

  while (static_cast<int>(centroids.size()) < k) {
    double total = 0.0;
    for (double v : d2) total += v;
    if (!(total > 0.0)) throw InfeasibleError("k-means++ ran out of distinct points");
    const double target = rng.uniform() * total;
    std::size_t pick = pts.size();
    double cum = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (d2[i] <= 0.0) continue;
      cum += d2[i];
      pick = i;
      if (cum > target) break;
    }
    centroids.push_back(pts[pick]);
    for (std::size_t i = 0; i < pts.size(); ++i) d2[i] = std::min(d2[i], squared_distance(pts[i], centroids.back()));
  }
  return centroids;
}

}  // namespace

KMeansFit kmeans_fit(std::span<const std::vector<double>> descriptors, const KMeansOptions& options) {
  const int k = options.k;
  if (k <= 0) throw ArgumentError("k must be positive");
  if (options.max_iters < 0) throw ArgumentError("max_iters must be non-negative");
  if (descriptors.empty()) throw ArgumentError("no descriptors to cluster");
  const std::size_t dim = descriptors.front().size();
  if (dim == 0) throw ArgumentError("descriptors must be non-empty vectors");
  for (const auto& d : descriptors) {
    if (d.size() != dim) throw ArgumentError("descriptors differ in length");
    check_finite(d, "descriptor entries");
  }

  Points pts(descriptors.begin(), descriptors.end());
  std::optional<NormStats> stats;
  if (options.standardize) {
    stats = compute_norm_stats(pts);
    for (auto& p : pts) {
      for (std::size_t d = 0; d < dim; ++d) p[d] = (p[d] - stats->mean[d]) / stats->stddev[d];
    }
  }
  if (count_distinct(pts) < static_cast<std::size_t>(k)) {
    throw InfeasibleError("fewer than " + std::to_string(k) + " distinct descriptors");
  }

  Rng rng(options.seed);
  Points centroids = kmeans_plus_plus(pts, k, rng);

  const std::size_t n = pts.size();
  std::vector<int> labels(n);
  std::vector<double> cost(n);
  auto assign_all = [&]() {
    bool changed = false;
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      auto [j, d2] = nearest_centroid(centroids, pts[i]);
      changed |= labels[i] != j;
      labels[i] = j;
      cost[i] = d2;
      total += d2;
    }
    return std::pair{changed, total};
  };

  KMeansFit fit{Codebook(centroids, options.kind, stats), {}, 0, false};
  std::fill(labels.begin(), labels.end(), -1);
  fit.inertia_trace.push_back(assign_all().second);

  for (int it = 1; it <= options.max_iters; ++it) {
    Points sums(static_cast<std::size_t>(k), std::vector<double>(dim, 0.0));
    std::vector<std::size_t> counts(static_cast<std::size_t>(k), 0);
    for (std::size_t i = 0; i < n; ++i) {
      auto& s = sums[static_cast<std::size_t>(labels[i])];
      for (std::size_t d = 0; d < dim; ++d) s[d] += pts[i][d];
      ++counts[static_cast<std::size_t>(labels[i])];
    }
    for (std::size_t j = 0; j < static_cast<std::size_t>(k); ++j) {
      if (counts[j] == 0) continue;
      for (std::size_t d = 0; d < dim; ++d) centroids[j][d] = sums[j][d] / static_cast<double>(counts[j]);
    }
    for (std::size_t j = 0; j < static_cast<std::size_t>(k); ++j) {
      if (counts[j] != 0) continue;
      std::size_t far = 0;
      double far_d2 = -1.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double d2 = nearest_centroid(centroids, pts[i]).second;
        if (d2 > far_d2) {
          far_d2 = d2;
          far = i;
        }
      }
      centroids[j] = pts[far];
    }

    auto [changed, total] = assign_all();
    fit.inertia_trace.push_back(total);
    fit.iterations = it;
    if (!changed) {
      fit.converged = true;
      break;
    }
  }

  fit.codebook = Codebook(std::move(centroids), options.kind, std::move(stats));
  return fit;
}

int assign_label(const Codebook& codebook, std::span<const double> descriptor) {
  const std::vector<double> x = codebook.project(descriptor);
  return nearest_centroid(codebook.centroids(), x).first + 1;
}

double inertia(const Codebook& codebook, std::span<const std::vector<double>> descriptors) {
  double total = 0.0;
  for (const auto& d : descriptors) total += nearest_centroid(codebook.centroids(), codebook.project(d)).second;
  return total;
}

BowHistogram bow_histogram(std::span<const int> labels, int k) {
  if (k <= 0) throw ArgumentError("k must be positive");
  if (labels.empty()) throw ArgumentError("cannot build a histogram from no labels");
  BowHistogram h{std::vector<double>(static_cast<std::size_t>(k), 0.0)};
  for (int label : labels) {
    if (label < 1 || label > k) throw ArgumentError("label " + std::to_string(label) + " outside 1.." + std::to_string(k));
    h.bins[static_cast<std::size_t>(label - 1)] += 1.0;
  }
  for (double& b : h.bins) b /= static_cast<double>(labels.size());
  return h;
}

Cloud build_labeled_cloud(std::span<const DescribedTouch> entries, const Codebook& codebook, double w_scale) {
  if (!std::isfinite(w_scale) || w_scale < 0.0) throw ArgumentError("w_scale must be finite and non-negative");
  std::vector<LabeledPoint> pts;
  pts.reserve(entries.size());
  for (const auto& e : entries) {
    const int label = assign_label(codebook, e.descriptor.values);
    pts.push_back({e.position[0], e.position[1], e.position[2], w_scale * label});
  }
  return Cloud::from_labeled(pts);
}

std::string serialize_codebook(const Codebook& codebook) {
  std::string out = "codebook k=" + std::to_string(codebook.k()) + " dim=" + std::to_string(codebook.dim()) +
                    " kind=" + std::string(to_string(codebook.descriptor_kind())) + "\n";
  auto line = [&out](std::string_view prefix, const std::vector<double>& v) {
    out += prefix;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i > 0 || !prefix.empty()) out += ' ';
      out += format_double(v[i]);
    }
    out += '\n';
  };
  for (const auto& c : codebook.centroids()) line("", c);
  if (const auto& st = codebook.norm_stats()) {
    line("mean", st->mean);
    line("stddev", st->stddev);
  }
  return out;
}

namespace {

std::vector<std::string_view> tokens_of(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

std::string_view keyed(std::string_view token, std::string_view key, std::size_t line) {
  if (token.substr(0, key.size()) != key) throw ParseError(line, "expected '" + std::string(key) + "'");
  return token.substr(key.size());
}

}  // namespace

Codebook parse_codebook(std::string_view text) {
  std::size_t line_no = 0;
  std::size_t pos = 0;
  long long k = -1, dim = -1;
  DescriptorKind kind = DescriptorKind::ZernikeMoments;
  std::vector<std::vector<double>> centroids;
  std::optional<NormStats> stats;

  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const auto toks = tokens_of(text.substr(pos, end - pos));
    pos = end + 1;
    ++line_no;
    if (toks.empty() || toks.front().front() == '#') continue;

    if (k < 0) {
      if (toks.size() != 4 || toks[0] != "codebook" || !parse_int(keyed(toks[1], "k=", line_no), k) ||
          !parse_int(keyed(toks[2], "dim=", line_no), dim) || k <= 0 || dim <= 0) {
        throw ParseError(line_no, "expected 'codebook k=<k> dim=<dim> kind=<kind>'");
      }
      try {
        kind = descriptor_kind_from_string(keyed(toks[3], "kind=", line_no));
      } catch (const ArgumentError& e) {
        throw ParseError(line_no, e.what());
      }
      continue;
    }

    std::size_t first = 0;
    std::vector<double>* target = nullptr;
    std::vector<double> values;
    if (toks[0] == "mean" || toks[0] == "stddev") {
      if (!stats) stats = NormStats{};
      target = toks[0] == "mean" ? &stats->mean : &stats->stddev;
      first = 1;
    }
    if (toks.size() - first != static_cast<std::size_t>(dim)) {
      throw ParseError(line_no, "expected " + std::to_string(dim) + " values");
    }
    for (std::size_t i = first; i < toks.size(); ++i) {
      double v = 0.0;
      if (!parse_double(toks[i], v)) throw ParseError(line_no, "non-numeric value '" + std::string(toks[i]) + "'");
      values.push_back(v);
    }
    if (target) {
      *target = std::move(values);
    } else {
      if (stats) throw ParseError(line_no, "centroid after normalization statistics");
      centroids.push_back(std::move(values));
    }
  }
  if (k < 0) throw ParseError(line_no, "missing codebook header");
  if (centroids.size() != static_cast<std::size_t>(k)) {
    throw ParseError(line_no, "expected " + std::to_string(k) + " centroids, got " + std::to_string(centroids.size()));
  }
  try {
    return Codebook(std::move(centroids), kind, std::move(stats));
  } catch (const ArgumentError& e) {
    throw ParseError(line_no, e.what());
  }
}

}  // namespace iclap
