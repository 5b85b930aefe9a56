#include "statedpref/panel.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace statedpref {

std::string describe(const Violation& v)
{
  return "person " + std::to_string(v.person_id) + " [" + v.field + "]: " + v.message;
}

std::map<PersonId, std::vector<StatedRecord>> stated_by_person(const PseudoPanel& panel)
{
  std::map<PersonId, std::vector<StatedRecord>> out;
  for (const auto& r : panel.stated)
    out[r.person_id].push_back(r);
  for (auto& [id, recs] : out)
    std::stable_sort(recs.begin(), recs.end(), [](const auto& a, const auto& b) {
      return a.scenario_id < b.scenario_id;
    });
  return out;
}

int infer_t_count(const std::vector<StatedRecord>& stated)
{
  int max_id = -1;
  for (const auto& r : stated)
    max_id = std::max(max_id, r.scenario_id);
  return max_id + 1;
}

ValidationReport validate_panel(const PseudoPanel& panel, const PanelChecks& checks)
{
  ValidationReport report;
  if (panel.t_count < 2)
    report.push_back({0, "t_count", "need at least 2 scenarios, got " +
                                      std::to_string(panel.t_count)});

  std::map<PersonId, std::set<int>> seen;
  for (const auto& r : panel.stated) {
    if (!std::isfinite(r.p_star) || r.p_star < 0.0 || r.p_star > 1.0)
      report.push_back({r.person_id, "p_star",
                        "value " + std::to_string(r.p_star) + " outside [0,1] in scenario " +
                          std::to_string(r.scenario_id)});
    if (!std::isfinite(r.x))
      report.push_back({r.person_id, "x", "non-finite attribute in scenario " +
                                            std::to_string(r.scenario_id)});
    if (r.scenario_id < 0 || (panel.t_count > 0 && r.scenario_id >= panel.t_count))
      report.push_back({r.person_id, "scenario_id",
                        "scenario " + std::to_string(r.scenario_id) + " outside 0.." +
                          std::to_string(panel.t_count - 1)});
    if (!seen[r.person_id].insert(r.scenario_id).second)
      report.push_back({r.person_id, "scenario_id",
                        "duplicate scenario " + std::to_string(r.scenario_id)});
  }

  for (const auto& [id, scenarios] : seen)
    for (int t = 0; t < panel.t_count; ++t)
      if (!scenarios.contains(t))
        report.push_back({id, "scenario_id", "missing scenario " + std::to_string(t)});

  if (!checks.require_actual)
    return report;

  std::set<PersonId> actual_ids;
  for (const auto& a : panel.actual) {
    if (a.d != 0 && a.d != 1)
      report.push_back({a.person_id, "d", "value " + std::to_string(a.d) + " not in {0,1}"});
    if (!std::isfinite(a.x))
      report.push_back({a.person_id, "x", "non-finite actual attribute"});
    if (!actual_ids.insert(a.person_id).second)
      report.push_back({a.person_id, "person_id", "duplicate actual record"});
    if (!seen.contains(a.person_id))
      report.push_back({a.person_id, "person_id", "actual record without stated records"});
  }
  for (const auto& [id, scenarios] : seen)
    if (!actual_ids.contains(id))
      report.push_back({id, "person_id", "stated records without an actual record"});
  return report;
}

} // namespace statedpref
