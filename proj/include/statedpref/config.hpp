#pragma once

#include "statedpref/dgp.hpp"

#include <filesystem>
#include <istream>
#include <string>
#include <utility>
#include <vector>

namespace statedpref {

//! Reads a key=value DGP description. Unspecified keys keep their defaults;
//! unknown keys, malformed values and duplicate keys are ConfigErrors.
//!
//!   n=1000                      t_scenarios=10
//!   noise_scale=0.05            rounding=first_decimal|none
//!   threshold=uniform|logistic  scenario_grid=-2,-1.6,...,2
//!   mean.<i>=...                cov.<i>.<j>=...   (1-based, sets both triangles)
//!   actual_coef.<i>=...         actual_eta2_coef=...
//!   stated_coef.<i>=...         stated_eta2_coef=...
//!
//! Lines starting with '#' are comments. The cfg is validated before return.
DgpConfig parse_dgp_config(std::istream& in, const std::string& source = "<config>");
DgpConfig load_dgp_config(const std::filesystem::path& path);

//! Canonical key=value form (every key, upper covariance triangle).
std::vector<std::pair<std::string, std::string>> dgp_config_entries(const DgpConfig& cfg);

std::vector<double> parse_number_list(const std::string& text, const std::string& what);

} // namespace statedpref
