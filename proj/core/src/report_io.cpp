#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <stdexcept>

#include "experiment_internal.hpp"

namespace adt::experiment {
namespace detail {

nlohmann::json config_to_json(const ExperimentConfig& c) {
  return {
      {"template", to_string(c.tmpl)},
      {"dataset_path", c.dataset_path},
      {"columns",
       {{"user_col", c.columns.user_col},
        {"item_col", c.columns.item_col},
        {"value_col", c.columns.value_col},
        {"fp_threshold", c.columns.fp_threshold}}},
      {"synth",
       {{"users", c.synth_users},
        {"items", c.synth_items},
        {"latent_dim", c.synth_latent},
        {"density", c.synth_density}}},
      {"split", {c.split.train, c.split.validation, c.split.test}},
      {"noise_rate", c.noise_rate},
      {"extra_fraction", c.extra_fraction},
      {"model",
       {{"kind", model::to_string(c.model.kind)},
        {"factors", c.model.factors},
        {"mlp_tower", c.model.mlp_tower},
        {"hidden", c.model.hidden},
        {"corruption", c.model.corruption}}},
      {"strategy", strategy_name(c.strategy)},
      {"epsilon_max", c.epsilon_max},
      {"epsilon_n", c.epsilon_n},
      {"beta", c.beta},
      {"learning_rate", c.learning_rate},
      {"batch_size", c.batch_size},
      {"negative_ratio", c.negative_ratio},
      {"epochs", c.epochs},
      {"warmup_epochs", c.warmup_epochs},
      {"finetune_epochs", c.finetune_epochs},
      {"colliding",
       {{"lambda", c.colliding.lambda},
        {"neighbors", c.colliding.n_neighbors},
        {"ratio_threshold", c.colliding.ratio_threshold},
        {"weighting",
         c.colliding.weighting == colliding::NeighborWeighting::kUniform ? "uniform"
                                                                         : "similarity"}}},
      {"eval_ks", c.eval_ks},
      {"activity_groups", c.activity_groups},
      {"seeds", c.seeds},
  };
}

}  // namespace detail

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

json table_to_json(const eval::MetricTable& t) {
  json recall = json::object(), ndcg = json::object();
  for (const auto& [k, v] : t.recall) recall[std::to_string(k)] = v;
  for (const auto& [k, v] : t.ndcg) ndcg[std::to_string(k)] = v;
  return {{"recall", recall},
          {"ndcg", ndcg},
          {"users_evaluated", t.users_evaluated},
          {"users_skipped", t.users_skipped}};
}

json arm_to_json(const ArmOutput& arm) {
  json j = {{"metrics", table_to_json(arm.report.overall)},
            {"skip_policy", arm.report.skip_policy}};
  if (!arm.report.by_activity.empty()) {
    json groups = json::array();
    for (const auto& g : arm.report.by_activity) groups.push_back(table_to_json(g));
    j["by_activity"] = groups;
  }
  if (arm.gated) j["gated"] = table_to_json(*arm.gated);
  if (!arm.report.denoise.empty()) {
    json rows = json::array();
    for (const auto& r : arm.report.denoise)
      rows.push_back({{"epoch", r.epoch},
                      {"recall", r.recall},
                      {"precision", r.precision},
                      {"precision_defined", r.precision_defined},
                      {"baseline_recall", r.baseline_recall},
                      {"baseline_precision", r.baseline_precision}});
    j["denoise"] = rows;
  }
  return j;
}

void write_text_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);  // binary: no platform newline games
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("short write: " + path.string());
}

// Arm -> metric -> per-seed values, in first-seen arm order.
struct Aggregate {
  std::vector<std::string> arm_order;
  std::map<std::string, std::map<std::string, std::vector<double>>> values;

  void add(const std::string& arm, const std::string& metric, double v) {
    if (values.find(arm) == values.end()) arm_order.push_back(arm);
    values[arm][metric].push_back(v);
  }
};

Aggregate aggregate(const ExperimentResult& result) {
  Aggregate agg;
  for (const auto& seed : result.seeds) {
    for (const auto& arm : seed.arms) {
      for (const auto& [k, v] : arm.report.overall.recall)
        agg.add(arm.name, "recall@" + std::to_string(k), v);
      for (const auto& [k, v] : arm.report.overall.ndcg)
        agg.add(arm.name, "ndcg@" + std::to_string(k), v);
      if (arm.gated) {
        for (const auto& [k, v] : arm.gated->recall)
          agg.add(arm.name, "gated_recall@" + std::to_string(k), v);
        for (const auto& [k, v] : arm.gated->ndcg)
          agg.add(arm.name, "gated_ndcg@" + std::to_string(k), v);
      }
    }
  }
  return agg;
}

}  // namespace

void emit_report(const ExperimentResult& result, const std::string& out_dir) {
  if (result.seeds.empty()) throw std::invalid_argument("nothing to report: no seed runs");

  const fs::path root(out_dir);
  fs::create_directories(root);

  // --- per-seed artifacts ---
  for (const auto& seed : result.seeds) {
    const fs::path dir = root / ("seed_" + std::to_string(seed.seed));
    fs::create_directories(dir);

    json arms = json::object();
    for (const auto& arm : seed.arms) arms[arm.name] = arm_to_json(arm);
    const json report = {{"seed", seed.seed},
                         {"config_hash", config_hash(result.config)},
                         {"arms", arms}};
    write_text_file(dir / "report.json", report.dump(2) + "\n");

    // loss_curve.csv / drop_diag.csv come from the first arm that produced one
    // (the template's primary training run).
    const auto with_loss =
        std::find_if(seed.arms.begin(), seed.arms.end(),
                     [](const ArmOutput& a) { return !a.loss_log.rows.empty(); });
    train::LossCurveLog empty_loss;
    (with_loss != seed.arms.end() ? with_loss->loss_log : empty_loss)
        .write_csv((dir / "loss_curve.csv").string());

    const auto with_drop =
        std::find_if(seed.arms.begin(), seed.arms.end(),
                     [](const ArmOutput& a) { return !a.drop_log.entries.empty(); });
    if (with_drop != seed.arms.end() && !with_drop->report.denoise.empty()) {
      eval::write_denoise_csv(with_drop->report.denoise,
                              (dir / "drop_diag.csv").string());
    } else {
      eval::write_denoise_csv({}, (dir / "drop_diag.csv").string());
    }
  }

  // --- summary.json ---
  const Aggregate agg = aggregate(result);
  json arms = json::object();
  for (const auto& [arm, metrics] : agg.values) {
    json m = json::object();
    for (const auto& [metric, vals] : metrics) {
      const MetricSummary s = summarize(vals);
      m[metric] = {{"mean", s.mean}, {"stddev", s.stddev}, {"per_seed", s.per_seed}};
    }
    arms[arm] = m;
  }
  const json summary = {{"config", detail::config_to_json(result.config)},
                        {"config_hash", config_hash(result.config)},
                        {"arms", arms}};
  write_text_file(root / "summary.json", summary.dump(2) + "\n");

  // --- summary.txt ---
  std::ostringstream txt;
  txt << "experiment: " << to_string(result.config.tmpl)
      << "   seeds: " << result.seeds.size() << "   config: " << config_hash(result.config)
      << "\n\n";
  std::vector<std::string> metric_names;
  for (const auto& [arm, metrics] : agg.values)
    for (const auto& [metric, vals] : metrics)
      if (std::find(metric_names.begin(), metric_names.end(), metric) ==
          metric_names.end())
        metric_names.push_back(metric);
  std::sort(metric_names.begin(), metric_names.end());

  txt << std::left << std::setw(22) << "arm";
  for (const auto& m : metric_names) txt << std::setw(22) << m;
  txt << "\n";
  for (const auto& arm : agg.arm_order) {
    txt << std::left << std::setw(22) << arm;
    const auto& metrics = agg.values.at(arm);
    for (const auto& m : metric_names) {
      std::ostringstream cell;
      if (const auto it = metrics.find(m); it != metrics.end()) {
        const MetricSummary s = summarize(it->second);
        cell << std::fixed << std::setprecision(4) << s.mean << " +/- "
             << std::setprecision(4) << s.stddev;
      } else {
        cell << "-";
      }
      txt << std::setw(22) << cell.str();
    }
    txt << "\n";
  }
  write_text_file(root / "summary.txt", txt.str());
}

}  // namespace adt::experiment
