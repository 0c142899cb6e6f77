#pragma once

#include "binflux/config.hpp"
#include "binflux/exact_oracle.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace binflux {

struct ExactMethod {};

struct MonteCarloMethod {
  std::uint64_t shots = 1'000'000;
  std::uint64_t seed = 0;
};

using BuildMethod = std::variant<ExactMethod, MonteCarloMethod>;

struct RowProvenance {
  enum class Kind { Exact, MonteCarlo, Interpolated };
  Kind kind = Kind::Exact;
  std::uint64_t shots = 0; ///< MonteCarlo only
  std::uint64_t seed = 0;  ///< MonteCarlo only
  int mu_lo = 0;           ///< Interpolated only
  int mu_hi = 0;           ///< Interpolated only

  bool operator==(const RowProvenance &) const = default;
};

/// M[mu][n] = p(n | mu) for integer mu = 0..mu_max. Immutable once built.
struct ResponseMatrix {
  int mu_max = 0;
  std::size_t bins = 0;
  std::vector<ClickDistribution> rows;
  std::vector<RowProvenance> provenance;
  std::string fingerprint;
  /// Support rows used for interpolation; empty when every row was computed.
  std::vector<int> support;
  BuildMethod method = ExactMethod{};

  double at(int mu, std::size_t n) const { return rows.at(std::size_t(mu)).probs.at(n); }
  std::vector<double> column(std::size_t n) const;
  /// Compact description stored in the file header, e.g. "exact" or
  /// "mc:shots=1000000:seed=7+interp:0:10:50:100:200:400".
  std::string method_string() const;
};

/// Rows are computed at every integer mu when `support` is empty. Otherwise
/// only the support rows (plus 0 and mu_max) are computed and the rest are
/// interpolated between them.
ResponseMatrix build_matrix(const SystemConfig &config, int mu_max,
                            const BuildMethod &method = ExactMethod{},
                            const std::vector<int> &support = {});

/// Per-n linear interpolation between the support rows bracketing mu,
/// renormalized. Exactly at a support point the stored row is returned.
ClickDistribution interpolate_row(const ResponseMatrix &m, double mu);

/// Total-variation distance between interpolate_row(m, mu) and the exact
/// click law at mu.
double interpolation_error(const ResponseMatrix &m, const SystemConfig &config, double mu);

double total_variation(std::span<const double> a, std::span<const double> b);

bool fingerprint_matches(const ResponseMatrix &m, const SystemConfig &config);

enum class MatrixFormat { Csv, Json };

/// Json for a ".json" extension, Csv otherwise.
MatrixFormat format_for_path(const std::filesystem::path &path);

void write_matrix_csv(const ResponseMatrix &m, std::ostream &out);
ResponseMatrix read_matrix_csv(std::istream &in);
nlohmann::json matrix_to_json(const ResponseMatrix &m);
ResponseMatrix matrix_from_json(const nlohmann::json &j);

void save_matrix(const ResponseMatrix &m, const std::filesystem::path &path);
ResponseMatrix load_matrix(const std::filesystem::path &path);

} // namespace binflux
