#pragma once

#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include <nlohmann/json.hpp>

#include "cot2el/core/gold.hpp"
#include "cot2el/judge/judge.hpp"
#include "cot2el/metrics/metrics.hpp"

namespace cot2el {

using json = nlohmann::json;

/// Key for one judge output file: (judge name, method, variant name).
using JudgeKey = std::tuple<std::string, JudgeMethod, std::string>;

struct InstanceMetrics {
  std::string judge;
  std::string variant;
  JudgeMethod method = JudgeMethod::RankRank;
  std::string instance_id;
  std::optional<double> tau_a, tau_b, rho;
  std::optional<double> kl, jsd, tvd;  // NLI, logits only
  std::optional<double> rmse, mae;     // MCQA, score only
};

struct MethodSummary {
  std::optional<double> tau, rho;
  std::size_t n = 0;  // instances with a judge output
  std::size_t n_tau = 0, n_rho = 0;
};

struct VariantSummary {
  std::string judge;
  std::string variant;
  std::map<JudgeMethod, MethodSummary> methods;
  std::optional<double> kl, jsd, tvd;
  std::optional<double> rmse, mae, r2;
};

struct Evaluation {
  std::string dataset;
  TaskKind task = TaskKind::NLI;
  KendallVariant tau = KendallVariant::TauB;
  std::vector<VariantSummary> rows;
  std::vector<InstanceMetrics> instances;
};

namespace detail {

template <class F>
std::optional<double> defined(F f) {
  try {
    return f();
  } catch (const ValidationError&) {
    return std::nullopt;
  }
}

inline std::optional<double> mean_of(const std::vector<double>& xs) {
  if (xs.empty()) return std::nullopt;
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

}  // namespace detail

/// Correlations are per instance and averaged over instances where they are
/// defined; distribution metrics are per-instance means with KL(gold || pred);
/// score metrics pool every (instance, option) pair.
inline Evaluation evaluate(const std::string& dataset, TaskKind task, const std::vector<Instance>& instances,
                           const std::vector<std::string>& judges, const std::vector<std::string>& variants,
                           const std::vector<JudgeMethod>& methods,
                           const std::map<JudgeKey, std::vector<JudgeOutputs>>& outputs, KendallVariant tau) {
  Evaluation ev{dataset, task, tau, {}, {}};
  std::map<std::string, const Instance*> by_id;
  for (const auto& inst : instances) by_id[inst.id] = &inst;

  for (const auto& judge : judges) {
    for (const auto& variant : variants) {
      VariantSummary row{judge, variant, {}, {}, {}, {}, {}, {}, {}};
      for (auto method : methods) {
        MethodSummary ms;
        std::vector<double> taus, rhos, kls, jsds, tvds, pred_scores, gold_scores;
        auto it = outputs.find({judge, method, variant});
        if (it != outputs.end()) {
          for (const auto& out : it->second) {
            auto inst_it = by_id.find(out.instance_id);
            if (inst_it == by_id.end()) continue;
            const Instance& inst = *inst_it->second;
            const Ranking gold = gold_ranking(inst);
            InstanceMetrics im{judge, variant, method, inst.id, {}, {}, {}, {}, {}, {}, {}, {}};
            im.tau_a = kendall_tau(out.ranking, gold, KendallVariant::TauA);
            im.tau_b = detail::defined([&] { return kendall_tau(out.ranking, gold, KendallVariant::TauB); });
            im.rho = detail::defined([&] { return spearman_rho(out.ranking, gold); });
            if (auto t = tau == KendallVariant::TauA ? im.tau_a : im.tau_b) taus.push_back(*t);
            if (im.rho) rhos.push_back(*im.rho);
            if (task == TaskKind::NLI && out.distribution) {
              const Distribution g = aggregate_gold_distribution(inst);
              im.kl = kl_divergence(g, *out.distribution);
              im.jsd = js_distance(g, *out.distribution);
              im.tvd = total_variation(g, *out.distribution);
              kls.push_back(*im.kl);
              jsds.push_back(*im.jsd);
              tvds.push_back(*im.tvd);
            }
            if (task == TaskKind::MCQA && out.scores) {
              const ScoreVector g = aggregate_gold_scores(inst);
              im.rmse = rmse(out.scores->values(), g.values());
              im.mae = mae(out.scores->values(), g.values());
              pred_scores.insert(pred_scores.end(), out.scores->values().begin(), out.scores->values().end());
              gold_scores.insert(gold_scores.end(), g.values().begin(), g.values().end());
            }
            ++ms.n;
            ev.instances.push_back(std::move(im));
          }
        }
        ms.tau = detail::mean_of(taus);
        ms.rho = detail::mean_of(rhos);
        ms.n_tau = taus.size();
        ms.n_rho = rhos.size();
        row.methods[method] = ms;
        if (method == JudgeMethod::RankLogits && task == TaskKind::NLI) {
          row.kl = detail::mean_of(kls);
          row.jsd = detail::mean_of(jsds);
          row.tvd = detail::mean_of(tvds);
        }
        if (method == JudgeMethod::RankScore && task == TaskKind::MCQA && !pred_scores.empty()) {
          row.rmse = rmse(pred_scores, gold_scores);
          row.mae = mae(pred_scores, gold_scores);
          row.r2 = detail::defined([&] { return r_squared(pred_scores, gold_scores); });
        }
      }
      ev.rows.push_back(std::move(row));
    }
  }
  return ev;
}

// ---- emission ---------------------------------------------------------------

inline std::string format_metric(std::optional<double> v) {
  if (!v || !std::isfinite(*v)) return "NA";
  double x = *v;
  if (std::abs(x) < 5e-7) x = 0.0;  // no "-0.000000"
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", x);
  return buf;
}

inline json metric_json(std::optional<double> v) { return v && std::isfinite(*v) ? json(*v) : json(nullptr); }

inline std::vector<std::string> report_header(TaskKind task) {
  std::vector<std::string> h = {"judge", "variant"};
  if (task == TaskKind::NLI) h.insert(h.end(), {"KL", "JSD", "TVD"});
  else h.insert(h.end(), {"RMSE", "MAE", "R2"});
  for (auto m : {JudgeMethod::RankRank, JudgeMethod::RankLogits, JudgeMethod::RankScore}) {
    h.push_back(std::string(to_string(m)) + "_tau");
    h.push_back(std::string(to_string(m)) + "_rho");
  }
  return h;
}

inline std::vector<std::string> report_cells(const VariantSummary& row, TaskKind task) {
  std::vector<std::string> cells = {row.judge, row.variant};
  if (task == TaskKind::NLI) {
    for (auto v : {row.kl, row.jsd, row.tvd}) cells.push_back(format_metric(v));
  } else {
    for (auto v : {row.rmse, row.mae, row.r2}) cells.push_back(format_metric(v));
  }
  for (auto m : {JudgeMethod::RankRank, JudgeMethod::RankLogits, JudgeMethod::RankScore}) {
    auto it = row.methods.find(m);
    cells.push_back(format_metric(it == row.methods.end() ? std::nullopt : it->second.tau));
    cells.push_back(format_metric(it == row.methods.end() ? std::nullopt : it->second.rho));
  }
  return cells;
}

inline std::string csv_line(const std::vector<std::string>& cells) {
  std::string out;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out += ',';
    const auto& c = cells[i];
    if (c.find_first_of(",\"\n") == std::string::npos) {
      out += c;
      continue;
    }
    out += '"';
    for (char ch : c) {
      if (ch == '"') out += '"';
      out += ch;
    }
    out += '"';
  }
  return out + "\n";
}

/// Wide table: one row per (judge, variant).
inline std::string report_csv(const Evaluation& ev) {
  std::string out = csv_line(report_header(ev.task));
  for (const auto& row : ev.rows) out += csv_line(report_cells(row, ev.task));
  return out;
}

inline const std::vector<std::string>& long_header() {
  static const std::vector<std::string> h = {"judge", "variant", "method", "instance_id", "tau_a", "tau_b",
                                             "rho",   "KL",      "JSD",    "TVD",         "RMSE",  "MAE"};
  return h;
}

/// One row per (judge, variant, method, instance).
inline std::string long_csv(const Evaluation& ev) {
  std::string out = csv_line(long_header());
  for (const auto& m : ev.instances)
    out += csv_line({m.judge, m.variant, to_string(m.method), m.instance_id, format_metric(m.tau_a),
                     format_metric(m.tau_b), format_metric(m.rho), format_metric(m.kl), format_metric(m.jsd),
                     format_metric(m.tvd), format_metric(m.rmse), format_metric(m.mae)});
  return out;
}

inline json evaluation_to_json(const Evaluation& ev) {
  json rows = json::array();
  for (const auto& r : ev.rows) {
    json methods = json::object();
    for (const auto& [m, s] : r.methods)
      methods[to_string(m)] = {{"tau", metric_json(s.tau)}, {"rho", metric_json(s.rho)}, {"n", s.n},
                               {"n_tau", s.n_tau},          {"n_rho", s.n_rho}};
    json row = {{"judge", r.judge}, {"variant", r.variant}, {"methods", methods}};
    if (ev.task == TaskKind::NLI) {
      row["distribution"] = {{"KL", metric_json(r.kl)}, {"JSD", metric_json(r.jsd)}, {"TVD", metric_json(r.tvd)}};
    } else {
      row["score"] = {{"RMSE", metric_json(r.rmse)}, {"MAE", metric_json(r.mae)}, {"R2", metric_json(r.r2)}};
    }
    rows.push_back(row);
  }
  json inst = json::array();
  for (const auto& m : ev.instances)
    inst.push_back({{"judge", m.judge},          {"variant", m.variant},     {"method", to_string(m.method)},
                    {"instance_id", m.instance_id}, {"tau_a", metric_json(m.tau_a)}, {"tau_b", metric_json(m.tau_b)},
                    {"rho", metric_json(m.rho)},    {"KL", metric_json(m.kl)},       {"JSD", metric_json(m.jsd)},
                    {"TVD", metric_json(m.tvd)},    {"RMSE", metric_json(m.rmse)},   {"MAE", metric_json(m.mae)}});
  return {{"dataset", ev.dataset},
          {"task", to_string(ev.task)},
          {"tau", ev.tau == KendallVariant::TauA ? "a" : "b"},
          {"columns", report_header(ev.task)},
          {"rows", rows},
          {"instances", inst}};
}

inline std::optional<double> metric_from_json(const json& j) {
  return j.is_null() ? std::nullopt : std::optional<double>(j.get<double>());
}

inline Evaluation evaluation_from_json(const json& j) {
  Evaluation ev;
  ev.dataset = j.at("dataset").get<std::string>();
  ev.task = j.at("task").get<std::string>() == "NLI" ? TaskKind::NLI : TaskKind::MCQA;
  ev.tau = j.at("tau").get<std::string>() == "a" ? KendallVariant::TauA : KendallVariant::TauB;
  for (const auto& r : j.at("rows")) {
    VariantSummary row;
    row.judge = r.at("judge").get<std::string>();
    row.variant = r.at("variant").get<std::string>();
    for (const auto& [m, s] : r.at("methods").items())
      row.methods[judge_method_from_string(m)] = {metric_from_json(s.at("tau")), metric_from_json(s.at("rho")),
                                                  s.at("n").get<std::size_t>(), s.at("n_tau").get<std::size_t>(),
                                                  s.at("n_rho").get<std::size_t>()};
    if (r.contains("distribution")) {
      const auto& d = r.at("distribution");
      row.kl = metric_from_json(d.at("KL"));
      row.jsd = metric_from_json(d.at("JSD"));
      row.tvd = metric_from_json(d.at("TVD"));
    }
    if (r.contains("score")) {
      const auto& s = r.at("score");
      row.rmse = metric_from_json(s.at("RMSE"));
      row.mae = metric_from_json(s.at("MAE"));
      row.r2 = metric_from_json(s.at("R2"));
    }
    ev.rows.push_back(std::move(row));
  }
  for (const auto& m : j.at("instances"))
    ev.instances.push_back({m.at("judge").get<std::string>(), m.at("variant").get<std::string>(),
                            judge_method_from_string(m.at("method").get<std::string>()),
                            m.at("instance_id").get<std::string>(), metric_from_json(m.at("tau_a")),
                            metric_from_json(m.at("tau_b")), metric_from_json(m.at("rho")), metric_from_json(m.at("KL")),
                            metric_from_json(m.at("JSD")), metric_from_json(m.at("TVD")), metric_from_json(m.at("RMSE")),
                            metric_from_json(m.at("MAE"))});
  return ev;
}

/// Report document: the wide table as rows of named cells.
inline json report_json(const Evaluation& ev) {
  const auto header = report_header(ev.task);
  json rows = json::array();
  for (const auto& r : ev.rows) {
    const auto cells = report_cells(r, ev.task);
    json row = json::object();
    for (std::size_t i = 0; i < header.size(); ++i) row[header[i]] = cells[i];
    rows.push_back(row);
  }
  return {{"dataset", ev.dataset}, {"task", to_string(ev.task)}, {"columns", header}, {"rows", rows}};
}

}  // namespace cot2el
