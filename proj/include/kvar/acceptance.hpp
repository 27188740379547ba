#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "kvar/tqft.hpp"

namespace kvar {

struct CheckOutcome {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
  std::string provenance;  // source of the expected values
  double seconds = 0;
};

struct AcceptanceOptions {
  unsigned workers = 0;
  unsigned property_sets = 200;
  std::uint32_t seed = 1729;
};

constexpr int kCriteria = 13;

/// Criterion ids of "u2", "u3", "appendix" or "all"; invalid_argument otherwise.
std::vector<int> suite_criteria(std::string_view suite);
std::string criterion_name(int id);

/// Runs acceptance criteria. Matrices are computed once and shared.
class AcceptanceRunner {
 public:
  explicit AcceptanceRunner(AcceptanceOptions options = {});
  ~AcceptanceRunner();

  CheckOutcome run(int id);

 private:
  struct Group;
  AcceptanceOptions opt_;
  std::unique_ptr<Group> u2_, u3_;
  std::optional<TqftMatrix> u2_zpi_n_, u2_zpi_l_, u2_eta_, u3_zred_n_;

  Group& u2();
  Group& u3();
  const TqftMatrix& u2_zpi_n();
  const TqftMatrix& u2_zpi_l();
  const TqftMatrix& u2_eta();
  const TqftMatrix& u3_zred_n();

  CheckOutcome c1();
  CheckOutcome c2();
  CheckOutcome c3();
  CheckOutcome c4();
  CheckOutcome c5();
  CheckOutcome c6();
  CheckOutcome c7();
  CheckOutcome c8();
  CheckOutcome c9();
  CheckOutcome c10();
  CheckOutcome c11();
  CheckOutcome c12();
  CheckOutcome c13();
};

}  // namespace kvar
