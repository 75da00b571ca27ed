#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "regvb/lda.hpp"
#include "regvb/matrix.hpp"
#include "regvb/reg_lda.hpp"

namespace regvb {

// Standard model:    "K W alpha eta", K rows of lambda, optionally K rows of beta.
// Regularized model: "K W alpha eta reg_iter", "C <path>", K rows of nu, K rows of beta.
// Values are written in shortest round-trip form.
void write_standard_model(std::ostream& out, const StandardModel& model, bool with_beta);
void write_regularized_model(std::ostream& out, const RegularizedModel& model, const std::string& c_path);

struct LoadedModel {
  bool regularized = false;
  Hyperparameters hyper;
  std::size_t reg_iter = 0;
  std::string c_path;          ///< empty for standard models
  Matrix params;               ///< lambda or nu
  std::optional<Matrix> beta;  ///< present when the file carries it
};

LoadedModel read_model(std::istream& in);
LoadedModel load_model(const std::filesystem::path& path);

/// "update,rho,batch_size,bound,grt" with one line per record.
void write_trace_csv(std::ostream& out, std::span<const UpdateRecord> trace);

/// Shortest decimal form that parses back to the same double.
std::string format_double(double v);

}  // namespace regvb
