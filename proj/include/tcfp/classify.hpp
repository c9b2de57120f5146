#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tcfp/fingerprint.hpp"
#include "tcfp/lti.hpp"

namespace tcfp {

enum class Kernel { linear, polynomial, rbf, sigmoid };

std::string kernel_name(Kernel k);
Kernel parse_kernel(const std::string& s);

struct TrainConfig {
  Kernel kernel = Kernel::rbf;
  int epochs = 200;
  double lambda = 1e-3;
  std::uint64_t seed = 1;
  double gamma = 0.0;  // 0: 1 / (kept features), z-scored data has unit variance
  double coef0 = -1.0;  // <0: 1 for polynomial, 0 for sigmoid
  int degree = 3;
};

// One-vs-rest kernel machine. Rows of `support` are the z-scored training
// samples restricted to the kept features.
struct SvmModel {
  Kernel kernel = Kernel::rbf;
  double gamma = 1.0;
  double coef0 = 0.0;
  int degree = 3;
  std::vector<std::string> classes;
  std::vector<int> kept;  // input columns with nonzero training spread
  Vector mean, scale;     // over all input columns
  Matrix support;
  Matrix coef;  // classes x samples, already divided by lambda * iterations
  std::size_t input_dim = 0;
};

double kernel_value(const SvmModel& m, const Vector& a, const Vector& b);

// Rows are samples. Throws DegenerateLabels (fewer than 2 classes, or a class
// with a single sample), BadInput (non-finite value), LengthError.
SvmModel train(const Matrix& X, const std::vector<std::string>& labels, const TrainConfig& cfg = {});

Vector decision_values(const SvmModel& m, const Vector& x);
// Argmax; ties go to the lowest class index.
std::string predict(const SvmModel& m, const Vector& x);
double accuracy(const SvmModel& m, const Matrix& X, const std::vector<std::string>& labels);

Matrix feature_matrix(const std::vector<FeatureVector>& rows);

struct CvResult {
  Kernel kernel = Kernel::rbf;
  double accuracy = 0.0;  // mean over folds, in [0, 1]
  std::vector<double> fold_accuracy;
};

// Stratified k-fold; fold membership is drawn from cfg.seed. Throws
// StratifyError when a class has fewer samples than folds.
CvResult cross_validate(const Matrix& X, const std::vector<std::string>& labels, int folds = 5,
                        const TrainConfig& cfg = {});

std::vector<CvResult> cross_validate_kernels(const Matrix& X, const std::vector<std::string>& labels, int folds = 5,
                                             TrainConfig cfg = {});

std::string svm_to_json(const SvmModel& m);
SvmModel svm_from_json(const std::string& text);

}  // namespace tcfp
