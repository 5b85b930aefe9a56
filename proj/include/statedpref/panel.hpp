#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace statedpref {

using PersonId = std::int64_t;

//! One stated-choice report: person, scenario, attribute, reported probability.
struct StatedRecord
{
  PersonId person_id = 0;
  int scenario_id = 0;
  double x = 0.0;
  double p_star = 0.0;
};

//! The realised attribute and the binary actual choice.
struct ActualRecord
{
  PersonId person_id = 0;
  double x = 0.0;
  int d = 0;
};

//! Actual choices plus scenarios 0..t_count-1 of stated choices per person.
struct PseudoPanel
{
  std::vector<StatedRecord> stated;
  std::vector<ActualRecord> actual;
  int t_count = 0;
};

struct Violation
{
  PersonId person_id = 0;
  std::string field;
  std::string message;
};

using ValidationReport = std::vector<Violation>;

struct PanelChecks
{
  //! When false the actual records are ignored (stated-only workflows).
  bool require_actual = true;
};

//! Lists every violated panel invariant. An empty report means the panel is valid.
ValidationReport validate_panel(const PseudoPanel& panel, const PanelChecks& checks = {});

std::string describe(const Violation& v);

//! Stated records grouped by person, each vector sorted by scenario id.
std::map<PersonId, std::vector<StatedRecord>> stated_by_person(const PseudoPanel& panel);

//! Infers t_count as 1 + the largest scenario id present.
int infer_t_count(const std::vector<StatedRecord>& stated);

} // namespace statedpref
