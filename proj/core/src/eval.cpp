#include "ove/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "ove/errors.hpp"

namespace ove {

LinearModel gauge_fixed(const LinearModel& model) {
  LinearModel out = model;
  const int K = model.num_classes();
  const std::size_t D = model.num_features();
  if (K == 0) return out;
  std::vector<double> mean(D, 0.0);
  for (int k = 0; k < K; ++k) {
    const auto w = model.row(k);
    for (std::size_t j = 0; j < D; ++j) mean[j] += w[j];
  }
  for (double& m : mean) m /= K;
  double bias_mean = 0.0;
  for (double b : model.biases()) bias_mean += b;
  bias_mean /= K;
  for (int k = 0; k < K; ++k) {
    auto w = out.row(k);
    for (std::size_t j = 0; j < D; ++j) w[j] -= mean[j];
    out.bias(k) -= bias_mean;
  }
  return out;
}

double param_norm(const LinearModel& reference, const LinearModel& candidate) {
  if (!reference.same_shape(candidate)) throw InvalidArgument("param_norm: model shapes differ");
  const auto a = reference.parameters();
  const auto b = candidate.parameters();
  double diff = 0.0;
  double ref = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff += (a[i] - b[i]) * (a[i] - b[i]);
    ref += a[i] * a[i];
  }
  if (ref == 0.0) throw InvalidArgument("param_norm: reference parameters are all zero");
  return std::sqrt(diff / ref);
}

double error_rate(std::span<const int> predicted, std::span<const int> truth) {
  if (predicted.size() != truth.size()) throw InvalidArgument("error_rate: length mismatch");
  if (truth.empty()) throw InvalidArgument("error_rate: empty input");
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) wrong += predicted[i] != truth[i];
  return static_cast<double>(wrong) / static_cast<double>(truth.size());
}

double nlpd(std::span<const std::vector<double>> prob_rows, std::span<const int> truth) {
  if (prob_rows.size() != truth.size()) throw InvalidArgument("nlpd: length mismatch");
  if (truth.empty()) throw InvalidArgument("nlpd: empty input");
  double total = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const auto& row = prob_rows[i];
    double sum = 0.0;
    for (double p : row) {
      if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument("nlpd: row " + std::to_string(i) + " has an invalid probability");
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-6) {
      throw InvalidArgument("nlpd: row " + std::to_string(i) + " does not sum to 1");
    }
    if (truth[i] < 0 || static_cast<std::size_t>(truth[i]) >= row.size()) {
      throw InvalidArgument("nlpd: truth label out of range at row " + std::to_string(i));
    }
    total -= std::log(std::max(row[static_cast<std::size_t>(truth[i])], kNlpdFloor));
  }
  return total / static_cast<double>(truth.size());
}

std::vector<double> smooth_trace(std::span<const double> trace, std::size_t window) {
  if (window < 1) throw InvalidArgument("smooth_trace: window must be >= 1");
  std::vector<double> out(trace.size());
  // Prefix sums in long double keep long traces free of running-sum drift.
  std::vector<long double> prefix(trace.size() + 1, 0.0L);
  for (std::size_t i = 0; i < trace.size(); ++i) prefix[i + 1] = prefix[i] + trace[i];
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const std::size_t b = i + 1 >= window ? i + 1 - window : 0;
    out[i] = static_cast<double>((prefix[i + 1] - prefix[b]) / static_cast<long double>(i + 1 - b));
  }
  return out;
}

std::vector<double> thin_trace(std::span<const double> trace, std::size_t factor) {
  if (factor < 1) throw InvalidArgument("thin_trace: factor must be >= 1");
  std::vector<double> out;
  out.reserve(trace.size() / factor + 1);
  for (std::size_t i = 0; i < trace.size(); i += factor) out.push_back(trace[i]);
  return out;
}

nlohmann::json MethodReport::to_json() const {
  nlohmann::json j;
  j["method"] = method;
  j["norm"] = norm ? nlohmann::json(*norm) : nlohmann::json(nullptr);
  j["error"] = error;
  j["nlpd"] = nlpd;
  j["nlpd_floor"] = kNlpdFloor;
  j["bound_final"] = bound_final ? nlohmann::json(*bound_final) : nlohmann::json(nullptr);
  return j;
}

MethodReport evaluate_model(const std::string& method, const LinearModel& model,
                            const SparseDataset& test) {
  if (test.empty()) throw InvalidArgument("evaluate_model: empty test set");
  if (model.num_classes() != test.num_classes() || model.num_features() < test.num_features()) {
    throw InvalidArgument("evaluate_model: model shape does not match the test set");
  }
  std::vector<int> predicted(test.size());
  double total = 0.0;
  for (std::size_t n = 0; n < test.size(); ++n) {
    const auto p = predict_proba(model, test.row(n));
    predicted[n] = static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin());
    total -= std::log(std::max(p[static_cast<std::size_t>(test.label(n))], kNlpdFloor));
  }
  MethodReport r;
  r.method = method;
  r.error = error_rate(predicted, test.labels());
  r.nlpd = total / static_cast<double>(test.size());
  return r;
}

void write_report_table(std::span<const MethodReport> reports, std::ostream& out) {
  out << "method,norm,error,nlpd\n";
  char buf[128];
  for (const auto& r : reports) {
    out << r.method << ',';
    if (r.norm) {
      std::snprintf(buf, sizeof(buf), "%.6f", *r.norm);
      out << buf;
    }
    std::snprintf(buf, sizeof(buf), ",%.6f,%.6f\n", r.error, r.nlpd);
    out << buf;
  }
}

}  // namespace ove
