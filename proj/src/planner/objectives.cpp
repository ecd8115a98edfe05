#include <algorithm>
#include <functional>
#include <map>
#include <set>

#include "hsgd/error.hpp"
#include "hsgd/planner.hpp"

namespace hsgd {

const ObjectiveNode* ObjectivesTree::find(const std::string& id) const {
  for (const auto& n : nodes) {
    if (n.id == id) return &n;
  }
  return nullptr;
}

ValidationReport validate_objectives(const ObjectivesTree& tree, const HsgdModel& model) {
  ValidationReport report;
  std::set<std::string> ids;
  std::map<std::string, int> parents;
  for (const auto& n : tree.nodes) {
    if (!ids.insert(n.id).second) report.add("objectives.duplicate", "duplicate objective node " + n.id, {n.id});
  }
  for (const auto& n : tree.nodes) {
    if (n.goal && !n.children.empty()) {
      report.add("objectives.mixed", "objective " + n.id + " has both a goal and children", {n.id});
    }
    if (!n.goal && n.children.empty()) {
      report.add("objectives.empty", "objective " + n.id + " has neither a goal nor children", {n.id});
    }
    if (n.goal) {
      const auto* d = model.find_diagram(n.goal->diagram);
      if (d == nullptr || d->find_state(n.goal->state) == nullptr) {
        report.add("objectives.goal", "objective " + n.id + " targets unknown state " + n.goal->str(),
                   {n.id, n.goal->str()});
      }
    }
    if (n.rule == LinkRule::k_of_n && !n.children.empty() &&
        (n.k < 1 || n.k > static_cast<int>(n.children.size()))) {
      report.add("objectives.k", "objective " + n.id + " needs 1 <= k <= " + std::to_string(n.children.size()), {n.id});
    }
    for (const auto& c : n.children) {
      if (ids.count(c) == 0) {
        report.add("objectives.unknown_child", "objective " + n.id + " links unknown node " + c, {n.id, c});
      } else if (++parents[c] == 2) {
        report.add("objectives.tree", "objective " + c + " has more than one parent", {c});
      }
    }
  }
  if (ids.count(tree.root) == 0) {
    report.add("objectives.root", "root objective " + tree.root + " is not declared", {tree.root});
    return report;
  }
  if (parents.count(tree.root) != 0) report.add("objectives.tree", "root objective " + tree.root + " has a parent");

  std::set<std::string> seen;
  std::function<void(const std::string&)> walk = [&](const std::string& id) {
    if (!seen.insert(id).second) return;
    if (const auto* n = tree.find(id)) {
      for (const auto& c : n->children) walk(c);
    }
  };
  walk(tree.root);
  for (const auto& id : ids) {
    if (seen.count(id) == 0) report.add("objectives.tree", "objective " + id + " is not under root " + tree.root, {id});
  }
  return report;
}

ObjectivesReport check_objectives(const ObjectivesTree& tree, const HsgdModel& model, const Trajectory& trajectory) {
  const auto report = validate_objectives(tree, model);
  for (const auto& issue : report.issues) {
    if (issue.code == "objectives.goal") throw Error(ErrorCode::unknown_goal_state, issue.message);
  }
  if (!report.ok()) throw Error(ErrorCode::precondition_violated, format_report(report));

  ObjectivesReport out;
  std::function<bool(const ObjectiveNode&)> eval = [&](const ObjectiveNode& n) {
    bool ok = false;
    if (n.goal) {
      const auto it = trajectory.diagrams.find(n.goal->diagram);
      if (it == trajectory.diagrams.end()) {
        throw Error(ErrorCode::unknown_goal_state, "trajectory has no diagram " + n.goal->diagram);
      }
      const auto& tr = it->second;
      ok = tr.dynamics.occupancy.at(n.goal->state).back() == tr.population;
      if (!ok) out.unmet_leaves.push_back(n.id);
    } else {
      int met = 0;
      for (const auto& c : n.children) met += eval(*tree.find(c)) ? 1 : 0;
      const int total = static_cast<int>(n.children.size());
      switch (n.rule) {
        case LinkRule::all_children: ok = met == total; break;
        case LinkRule::any_child: ok = met > 0; break;
        case LinkRule::k_of_n: ok = met >= n.k; break;
      }
    }
    out.achieved[n.id] = ok;
    return ok;
  };
  out.root_achieved = eval(*tree.find(tree.root));
  return out;
}

}  // namespace hsgd
