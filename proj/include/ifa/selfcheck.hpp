#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace ifa {

struct SuiteResult {
  std::string name;
  bool passed = false;
  double max_err = 0.0;
  std::string note;
};

struct SelfCheckOptions {
  bool fault_skip_norm = false;  // negative control: disable the degree normalizer
  std::size_t equivalence_instances = 300;
  std::size_t normalization_instances = 100;
  std::size_t permutation_instances = 50;
  std::size_t auc_instances = 200;
  std::size_t associativity_trials = 200;
  std::uint64_t seed = 12345;
};

// Individual suites. Acceptance tests call these with their own pinned
// parameters; cmd_check runs them all with the defaults above.
SuiteResult check_matmul_associativity(std::uint64_t seed, std::size_t trials);
SuiteResult check_kernel_values();
SuiteResult check_oracle_equivalence(std::uint64_t seed, std::size_t instances,
                                     bool fault_skip_norm);
SuiteResult check_normalization_ones(std::uint64_t seed, std::size_t instances,
                                     bool fault_skip_norm);
SuiteResult check_weight_nonnegativity(std::uint64_t seed, std::size_t instances);
SuiteResult check_permutation_properties(std::uint64_t seed, std::size_t instances);
SuiteResult check_gradient_suite(std::uint64_t seed);
SuiteResult check_auc_oracle(std::uint64_t seed, std::size_t instances, std::size_t max_items);

struct StabilityProbe {
  double mean_abs_small = 0.0;
  double mean_abs_large = 0.0;
  double ratio = 0.0;
};

// Mean |output| of the sequence cross attention under fixed random params as
// the key/value count grows. Inputs have positive mean, the regime where the
// unnormalized aggregation grows linearly with n.
StabilityProbe stability_probe(bool normalize, std::size_t n_small, std::size_t n_large,
                               std::uint64_t seed);

SuiteResult check_stability_normalization(std::uint64_t seed);

std::vector<SuiteResult> run_selfcheck(const SelfCheckOptions& opt);
bool all_passed(const std::vector<SuiteResult>& results);

}  // namespace ifa
