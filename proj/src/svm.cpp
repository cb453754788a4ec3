#include "enose/svm.hpp"

#include "enose/error.hpp"
#include "enose/json_util.hpp"
#include "enose/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <list>
#include <unordered_map>

namespace enose {

double Kernel::operator()(const double* a, const double* b, Eigen::Index d) const {
  if (type == KernelType::Linear) {
    double dot = 0.0;
    for (Eigen::Index k = 0; k < d; ++k) dot += a[k] * b[k];
    return dot;
  }
  double sq = 0.0;
  for (Eigen::Index k = 0; k < d; ++k) {
    const double diff = a[k] - b[k];
    sq += diff * diff;
  }
  return std::exp(-gamma * sq);
}

void SvmParams::validate() const {
  if (!(C > 0.0)) throw Error(ErrorCode::BadParameter, "SVM C must be > 0");
  if (!(tol > 0.0)) throw Error(ErrorCode::BadParameter, "SVM tol must be > 0");
  if (max_passes < 1) throw Error(ErrorCode::BadParameter, "SVM max_passes must be >= 1");
  if (gamma && !(*gamma > 0.0)) throw Error(ErrorCode::BadParameter, "SVM gamma must be > 0");
}

double scale_gamma(const Matrix& x) {
  const double n = static_cast<double>(x.size());
  if (n == 0.0) return 1.0;
  const double mean = x.sum() / n;
  const double var = (x.array() - mean).square().sum() / n;
  const double d = static_cast<double>(x.cols());
  return var > 0.0 ? 1.0 / (d * var) : 1.0 / d;
}

namespace {

/// LRU cache of kernel rows K(i, .) over the training set.
class KernelRows {
 public:
  KernelRows(const Matrix& x, const Kernel& kernel, std::size_t budget_mb)
      : x_(x), kernel_(kernel) {
    const auto n = static_cast<std::size_t>(x.rows());
    const std::size_t bytes_per_row = std::max<std::size_t>(n * sizeof(double), 1);
    capacity_ = std::max<std::size_t>(2, (budget_mb << 20) / bytes_per_row);
    diagonal_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto r = x.row(static_cast<Eigen::Index>(i)).data();
      diagonal_[i] = kernel_(r, r, x.cols());
    }
  }

  double diagonal(std::size_t i) const { return diagonal_[i]; }

  /// Valid until the next call that may evict it; callers hold at most two.
  const std::vector<double>& row(std::size_t i) {
    if (auto it = index_.find(i); it != index_.end()) {
      order_.splice(order_.begin(), order_, it->second);
      return it->second->second;
    }
    if (order_.size() >= capacity_) {
      index_.erase(order_.back().first);
      order_.pop_back();
    }
    const auto n = static_cast<std::size_t>(x_.rows());
    std::vector<double> values(n);
    const auto xi = x_.row(static_cast<Eigen::Index>(i)).data();
    for (std::size_t t = 0; t < n; ++t) {
      values[t] = kernel_(xi, x_.row(static_cast<Eigen::Index>(t)).data(), x_.cols());
    }
    order_.emplace_front(i, std::move(values));
    index_[i] = order_.begin();
    return order_.front().second;
  }

 private:
  const Matrix& x_;
  Kernel kernel_;
  std::size_t capacity_;
  std::vector<double> diagonal_;
  std::list<std::pair<std::size_t, std::vector<double>>> order_;
  std::unordered_map<std::size_t, decltype(order_)::iterator> index_;
};

constexpr double kTau = 1e-12;

}  // namespace

double svm_dual_objective(const Matrix& x, std::span<const int> y, std::span<const double> alpha,
                          const Kernel& kernel) {
  const auto n = static_cast<std::size_t>(x.rows());
  double linear = 0.0, quad = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    linear += alpha[i];
    if (alpha[i] == 0.0) continue;
    for (std::size_t j = 0; j < n; ++j) {
      if (alpha[j] == 0.0) continue;
      quad += alpha[i] * alpha[j] * y[i] * y[j] *
              kernel(x.row(static_cast<Eigen::Index>(i)).data(),
                     x.row(static_cast<Eigen::Index>(j)).data(), x.cols());
    }
  }
  return linear - 0.5 * quad;
}

BinarySvm svm_fit_binary(const Matrix& x, std::span<const int> y, const SvmParams& params) {
  params.validate();
  const auto n = static_cast<std::size_t>(x.rows());
  if (y.size() != n) throw Error(ErrorCode::ShapeMismatch, "label count does not match rows");
  bool has_pos = false, has_neg = false;
  for (int label : y) {
    if (label == 1) {
      has_pos = true;
    } else if (label == -1) {
      has_neg = true;
    } else {
      throw Error(ErrorCode::BadParameter, "binary SVM labels must be -1 or +1");
    }
  }
  if (!has_pos || !has_neg) throw Error(ErrorCode::DegenerateLabels, "both labels must be present");

  BinarySvm out;
  out.kernel.type = params.kernel;
  out.kernel.gamma = params.kernel == KernelType::Rbf ? params.gamma.value_or(scale_gamma(x)) : 0.0;
  KernelRows rows(x, out.kernel, params.cache_mb);
  const double C = params.C;
  std::vector<double> alpha(n, 0.0);
  std::vector<double> grad(n, -1.0);  // gradient of 1/2 a'Qa - e'a
  auto yd = [&](std::size_t t) { return static_cast<double>(y[t]); };
  auto dual = [&] {
    double d = 0.0;
    for (std::size_t t = 0; t < n; ++t) d -= 0.5 * alpha[t] * (grad[t] - 1.0);
    return d;
  };

  const std::size_t max_iter = static_cast<std::size_t>(params.max_passes) * std::max<std::size_t>(n, 1);
  std::size_t iter = 0;
  double gap = std::numeric_limits<double>::infinity();
  out.dual_history.push_back(0.0);
  for (;;) {
    // Working-set selection: i maximizes -y_t G_t over I_up; j minimizes
    // the second-order objective decrease over I_low.
    double g_max = -std::numeric_limits<double>::infinity();
    double g_max2 = -std::numeric_limits<double>::infinity();
    std::ptrdiff_t i_sel = -1;
    for (std::size_t t = 0; t < n; ++t) {
      if (y[t] == 1) {
        if (alpha[t] < C && -grad[t] >= g_max) {
          g_max = -grad[t];
          i_sel = static_cast<std::ptrdiff_t>(t);
        }
      } else if (alpha[t] > 0.0 && grad[t] >= g_max) {
        g_max = grad[t];
        i_sel = static_cast<std::ptrdiff_t>(t);
      }
    }
    std::ptrdiff_t j_sel = -1;
    double best_obj = std::numeric_limits<double>::infinity();
    const std::vector<double>* ki = nullptr;
    if (i_sel >= 0) {
      const auto i = static_cast<std::size_t>(i_sel);
      ki = &rows.row(i);
      const double qii = rows.diagonal(i);
      for (std::size_t t = 0; t < n; ++t) {
        const double qit = yd(i) * yd(t) * (*ki)[t];
        if (y[t] == 1) {
          if (alpha[t] > 0.0) {
            const double grad_diff = g_max + grad[t];
            g_max2 = std::max(g_max2, grad[t]);
            if (grad_diff > 0.0) {
              double quad = qii + rows.diagonal(t) - 2.0 * yd(i) * qit;
              if (quad <= 0.0) quad = kTau;
              const double obj = -(grad_diff * grad_diff) / quad;
              if (obj <= best_obj) {
                best_obj = obj;
                j_sel = static_cast<std::ptrdiff_t>(t);
              }
            }
          }
        } else if (alpha[t] < C) {
          const double grad_diff = g_max - grad[t];
          g_max2 = std::max(g_max2, -grad[t]);
          if (grad_diff > 0.0) {
            double quad = qii + rows.diagonal(t) + 2.0 * yd(i) * qit;
            if (quad <= 0.0) quad = kTau;
            const double obj = -(grad_diff * grad_diff) / quad;
            if (obj <= best_obj) {
              best_obj = obj;
              j_sel = static_cast<std::ptrdiff_t>(t);
            }
          }
        }
      }
    }
    gap = g_max + g_max2;
    if (i_sel < 0 || j_sel < 0 || gap < params.tol) break;
    if (iter >= max_iter) {
      out.converged = false;
      break;
    }

    const auto i = static_cast<std::size_t>(i_sel);
    const auto j = static_cast<std::size_t>(j_sel);
    // Copy row i: fetching row j may evict it.
    const std::vector<double> k_i = *ki;
    const std::vector<double>& k_j = rows.row(j);
    const double kij = k_i[j];
    const double old_ai = alpha[i];
    const double old_aj = alpha[j];
    // Curvature along the feasible direction: K_ii + K_jj - 2 K_ij for
    // either label pairing.
    if (y[i] != y[j]) {
      double quad = rows.diagonal(i) + rows.diagonal(j) - 2.0 * kij;
      if (quad <= 0.0) quad = kTau;
      const double delta = (-grad[i] - grad[j]) / quad;
      const double diff = alpha[i] - alpha[j];
      alpha[i] += delta;
      alpha[j] += delta;
      if (diff > 0.0) {
        if (alpha[j] < 0.0) {
          alpha[j] = 0.0;
          alpha[i] = diff;
        }
      } else if (alpha[i] < 0.0) {
        alpha[i] = 0.0;
        alpha[j] = -diff;
      }
      if (diff > 0.0) {
        if (alpha[i] > C) {
          alpha[i] = C;
          alpha[j] = C - diff;
        }
      } else if (alpha[j] > C) {
        alpha[j] = C;
        alpha[i] = C + diff;
      }
    } else {
      double quad = rows.diagonal(i) + rows.diagonal(j) - 2.0 * kij;
      if (quad <= 0.0) quad = kTau;
      const double delta = (grad[i] - grad[j]) / quad;
      const double sum = alpha[i] + alpha[j];
      alpha[i] -= delta;
      alpha[j] += delta;
      if (sum > C) {
        if (alpha[i] > C) {
          alpha[i] = C;
          alpha[j] = sum - C;
        }
      } else if (alpha[j] < 0.0) {
        alpha[j] = 0.0;
        alpha[i] = sum;
      }
      if (sum > C) {
        if (alpha[j] > C) {
          alpha[j] = C;
          alpha[i] = sum - C;
        }
      } else if (alpha[i] < 0.0) {
        alpha[i] = 0.0;
        alpha[j] = sum;
      }
    }
    const double dai = alpha[i] - old_ai;
    const double daj = alpha[j] - old_aj;
    for (std::size_t t = 0; t < n; ++t) {
      grad[t] += yd(t) * (yd(i) * k_i[t] * dai + yd(j) * k_j[t] * daj);
    }
    ++iter;
    if (iter % n == 0) out.dual_history.push_back(dual());
  }
  out.dual_history.push_back(dual());
  out.iterations = iter;
  out.kkt_gap = gap;

  // Bias from free vectors, else the midpoint of the feasible interval.
  double ub = std::numeric_limits<double>::infinity();
  double lb = -std::numeric_limits<double>::infinity();
  double sum_free = 0.0;
  std::size_t n_free = 0;
  for (std::size_t t = 0; t < n; ++t) {
    const double yg = yd(t) * grad[t];
    if (alpha[t] >= C) {
      if (y[t] == -1) {
        ub = std::min(ub, yg);
      } else {
        lb = std::max(lb, yg);
      }
    } else if (alpha[t] <= 0.0) {
      if (y[t] == 1) {
        ub = std::min(ub, yg);
      } else {
        lb = std::max(lb, yg);
      }
    } else {
      ++n_free;
      sum_free += yg;
    }
  }
  const double rho = n_free > 0 ? sum_free / static_cast<double>(n_free) : (ub + lb) / 2.0;
  out.bias = -rho;

  for (std::size_t t = 0; t < n; ++t) {
    if (alpha[t] > 0.0) out.support_indices.push_back(t);
  }
  out.support_vectors = select_rows(x, out.support_indices);
  out.coef.resize(static_cast<Eigen::Index>(out.support_indices.size()));
  for (std::size_t s = 0; s < out.support_indices.size(); ++s) {
    const auto t = out.support_indices[s];
    out.coef[static_cast<Eigen::Index>(s)] = alpha[t] * yd(t);
  }
  if (out.kernel.type == KernelType::Linear) {
    out.weights = out.support_vectors.transpose() * out.coef;
  }
  out.alpha = std::move(alpha);
  return out;
}

double BinarySvm::decision(const double* row) const {
  const auto d = support_vectors.cols();
  if (kernel.type == KernelType::Linear && weights.size() == d) {
    double v = bias;
    for (Eigen::Index k = 0; k < d; ++k) v += weights[k] * row[k];
    return v;
  }
  double v = bias;
  for (Eigen::Index s = 0; s < support_vectors.rows(); ++s) {
    v += coef[s] * kernel(support_vectors.row(s).data(), row, d);
  }
  return v;
}

nlohmann::json BinarySvm::to_json() const {
  nlohmann::json j{{"kernel", kernel.type == KernelType::Linear ? "linear" : "rbf"},
                   {"gamma", kernel.gamma},
                   {"bias", bias},
                   {"coef", enose::to_json(coef)},
                   {"support_vectors", enose::to_json(support_vectors)},
                   {"converged", converged}};
  if (weights.size() > 0) j["weights"] = enose::to_json(weights);
  return j;
}

BinarySvm BinarySvm::from_json(const nlohmann::json& j) {
  BinarySvm m;
  m.kernel.type = j.at("kernel").get<std::string>() == "linear" ? KernelType::Linear : KernelType::Rbf;
  m.kernel.gamma = j.at("gamma").get<double>();
  m.bias = j.at("bias").get<double>();
  m.coef = vector_from_json(j.at("coef"));
  const auto d = j.contains("weights") ? static_cast<Eigen::Index>(j.at("weights").size()) : 0;
  m.support_vectors = matrix_from_json(j.at("support_vectors"), d);
  if (j.contains("weights")) m.weights = vector_from_json(j.at("weights"));
  m.converged = j.value("converged", true);
  return m;
}

Matrix softmax_rows(const Matrix& scores) {
  Matrix out(scores.rows(), scores.cols());
  for (Eigen::Index i = 0; i < scores.rows(); ++i) {
    const double top = scores.row(i).maxCoeff();
    double total = 0.0;
    for (Eigen::Index k = 0; k < scores.cols(); ++k) {
      out(i, k) = std::exp(scores(i, k) - top);
      total += out(i, k);
    }
    out.row(i) /= total;
  }
  return out;
}

Matrix SvmClassifier::decision_function(const Matrix& x) const {
  check_columns(x);
  Matrix out(x.rows(), num_classes());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (int k = 0; k < num_classes(); ++k) {
      out(i, k) = machines_[static_cast<std::size_t>(k)].decision(x.row(i).data());
    }
  }
  return out;
}

Matrix SvmClassifier::predict_proba(const Matrix& x) const {
  return softmax_rows(decision_function(x));
}

bool SvmClassifier::converged() const {
  return std::all_of(machines_.begin(), machines_.end(),
                     [](const BinarySvm& m) { return m.converged; });
}

nlohmann::json SvmClassifier::to_json() const {
  auto machines = nlohmann::json::array();
  for (const auto& m : machines_) machines.push_back(m.to_json());
  return {{"format_version", kModelFormatVersion},
          {"kind", kind()},
          {"multiclass", "one_vs_rest"},
          {"probability", "softmax_over_margins"},
          {"num_classes", num_classes()},
          {"num_features", num_features_},
          {"machines", std::move(machines)}};
}

SvmClassifier SvmClassifier::from_json(const nlohmann::json& j) {
  std::vector<BinarySvm> machines;
  const auto d = j.at("num_features").get<int>();
  for (const auto& m : j.at("machines")) {
    auto machine = BinarySvm::from_json(m);
    if (machine.support_vectors.cols() != d) {
      machine.support_vectors.conservativeResize(machine.support_vectors.rows(), d);
    }
    machines.push_back(std::move(machine));
  }
  return SvmClassifier(std::move(machines), d);
}

SvmClassifier svm_fit_multiclass(const Matrix& x, const Labels& y, int num_classes,
                                 const SvmParams& params, const FitOptions& options) {
  if (num_classes < 2) throw Error(ErrorCode::DegenerateLabels, "SVM needs at least 2 classes");
  if (static_cast<std::size_t>(x.rows()) != y.size()) {
    throw Error(ErrorCode::ShapeMismatch, "label count does not match rows");
  }
  SvmParams resolved = params;
  if (resolved.kernel == KernelType::Rbf && !resolved.gamma) resolved.gamma = scale_gamma(x);
  std::vector<BinarySvm> machines(static_cast<std::size_t>(num_classes));
  // With two classes the rest-vs-class machine is the exact mirror of the
  // class-vs-rest one, so it is derived rather than re-solved.
  const std::size_t solved = num_classes == 2 ? 1 : machines.size();
  const std::size_t first = num_classes == 2 ? 1 : 0;
  parallel_for(solved, options.workers, [&](std::size_t s) {
    const std::size_t k = first + s;
    std::vector<int> binary(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
      binary[i] = y[i] == static_cast<int>(k) ? 1 : -1;
    }
    machines[k] = svm_fit_binary(x, binary, resolved);
  });
  if (num_classes == 2) {
    machines[0] = machines[1];
    machines[0].coef = -machines[1].coef;
    machines[0].bias = -machines[1].bias;
    if (machines[0].weights.size() > 0) machines[0].weights = -machines[1].weights;
  }
  return SvmClassifier(std::move(machines), static_cast<int>(x.cols()));
}

}  // namespace enose
