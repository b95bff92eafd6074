#include "adt/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "experiment_internal.hpp"

namespace adt::experiment {
namespace {

template <class F>
auto stage(const std::string& name, F&& body) {
  try {
    return body();
  } catch (const std::exception& e) {
    throw std::runtime_error("stage '" + name + "' failed: " + e.what());
  }
}

int to_int(const std::string& key, const std::string& text) {
  try {
    std::size_t pos = 0;
    const int v = std::stoi(text, &pos);
    if (pos != text.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("config key '" + key + "': cannot parse integer '" +
                                text + "'");
  }
}

std::int64_t to_int64(const std::string& key, const std::string& text) {
  try {
    std::size_t pos = 0;
    const std::int64_t v = std::stoll(text, &pos);
    if (pos != text.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("config key '" + key + "': cannot parse integer '" +
                                text + "'");
  }
}

double to_double(const std::string& key, const std::string& text) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(text, &pos);
    if (pos != text.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("config key '" + key + "': cannot parse number '" +
                                text + "'");
  }
}

std::vector<int> to_int_list(const std::string& key, const std::string& text) {
  std::vector<int> out;
  std::string item;
  std::istringstream ss(text);
  while (std::getline(ss, item, ',')) out.push_back(to_int(key, item));
  if (out.empty()) throw std::invalid_argument("config key '" + key + "': empty list");
  return out;
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t");
  return s.substr(a, b - a + 1);
}

// Per-user (extra, total) train counts in one pass.
std::vector<std::pair<std::int64_t, std::int64_t>> extra_counts(
    const data::Dataset& ds) {
  std::vector<std::pair<std::int64_t, std::int64_t>> counts(
      static_cast<std::size_t>(ds.n_users), {0, 0});
  for (const auto& r : ds.train) {
    auto& [extra, total] = counts[static_cast<std::size_t>(r.user)];
    ++total;
    if (r.extra) ++extra;
  }
  return counts;
}

std::size_t count_extra(const data::Dataset& ds) {
  return static_cast<std::size_t>(
      std::count_if(ds.train.begin(), ds.train.end(),
                    [](const data::InteractionRecord& r) { return r.extra; }));
}

eval::Scorer plain_scorer(const model::ModelSnapshot& snap, const data::Dataset& ds) {
  return [&snap, &ds](std::int32_t u) { return model::predict_all(snap, ds, u); };
}

struct ArmInputs {
  const ExperimentConfig& config;
  const data::Dataset& dataset;
  std::uint64_t seed;
};

ArmOutput evaluate_arm(const ArmInputs& in, const std::string& name,
                       const model::ModelSnapshot& snap, train::LossCurveLog loss_log,
                       train::DropLog drop_log) {
  eval::EvalOptions opts;
  opts.ks = in.config.eval_ks;
  opts.activity_groups = in.config.activity_groups;
  auto report = stage("evaluate:" + name, [&] {
    return eval::evaluate(plain_scorer(snap, in.dataset), in.dataset, opts);
  });
  report.config_hash = config_hash(in.config);
  report.seed = in.seed;
  if (!drop_log.entries.empty() && in.dataset.has_noise_flags())
    report.denoise = eval::denoise_precision_recall(drop_log, in.dataset);
  return {name, std::move(report), std::move(loss_log), std::move(drop_log), std::nullopt};
}

}  // namespace

std::string to_string(Template t) {
  switch (t) {
    case Template::kCleanVsNormal: return "clean-vs-normal";
    case Template::kAdtCompare: return "adt-compare";
    case Template::kExtraFeedback: return "extra-feedback";
    case Template::kColliding: return "colliding";
  }
  throw std::logic_error("unknown template");
}

Template template_from_string(const std::string& name) {
  if (name == "clean-vs-normal") return Template::kCleanVsNormal;
  if (name == "adt-compare") return Template::kAdtCompare;
  if (name == "extra-feedback") return Template::kExtraFeedback;
  if (name == "colliding") return Template::kColliding;
  throw std::invalid_argument("unknown template: " + name);
}

std::string strategy_name(denoise::LossStrategy s) {
  switch (s) {
    case denoise::LossStrategy::kCe: return "ce";
    case denoise::LossStrategy::kTruncatedCe: return "t-ce";
    case denoise::LossStrategy::kReweightedCe: return "r-ce";
  }
  throw std::logic_error("unknown strategy");
}

denoise::LossStrategy strategy_from_string(const std::string& name) {
  if (name == "ce") return denoise::LossStrategy::kCe;
  if (name == "t-ce" || name == "tce") return denoise::LossStrategy::kTruncatedCe;
  if (name == "r-ce" || name == "rce") return denoise::LossStrategy::kReweightedCe;
  throw std::invalid_argument("unknown loss strategy: " + name);
}

ExperimentConfig default_config(Template t) {
  ExperimentConfig c;
  c.tmpl = t;
  switch (t) {
    case Template::kCleanVsNormal:
      c.strategy = denoise::LossStrategy::kCe;
      c.extra_fraction = 0;
      break;
    case Template::kAdtCompare:
      c.extra_fraction = 0;
      break;
    case Template::kExtraFeedback:
      break;
    case Template::kColliding:
      // Denser interactions give the revealed 10% enough records per user for
      // the warm-up phase to learn a meaningful similarity space; the shorter
      // main phase leaves the fused scores headroom over plain inference.
      c.synth_density = 0.1;
      c.epochs = 60;
      c.warmup_epochs = 100;
      c.colliding.n_neighbors = 20;
      break;
  }
  return c;
}

std::map<std::string, std::string> read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::map<std::string, std::string> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    const std::string text = trim(line);
    if (text.empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(line_no) +
                                  ": expected key = value");
    const std::string key = trim(text.substr(0, eq));
    const std::string value = trim(text.substr(eq + 1));
    if (key.empty())
      throw std::invalid_argument("config line " + std::to_string(line_no) + ": empty key");
    out[key] = value;
  }
  return out;
}

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  if (text.find(',') == std::string::npos) {
    const auto n = to_int64("seeds", text);
    if (n < 1) throw std::invalid_argument("seed count must be >= 1");
    for (std::int64_t k = 1; k <= n; ++k) seeds.push_back(static_cast<std::uint64_t>(k));
    return seeds;
  }
  std::string item;
  std::istringstream ss(text);
  while (std::getline(ss, item, ','))
    seeds.push_back(static_cast<std::uint64_t>(to_int64("seeds", trim(item))));
  if (seeds.empty()) throw std::invalid_argument("empty seed list");
  return seeds;
}

void apply_options(ExperimentConfig& config,
                   const std::map<std::string, std::string>& options) {
  for (const auto& [key, value] : options) {
    if (key == "template") config.tmpl = template_from_string(value);
    // Aliases keep the config-file names in lockstep with the CLI flags.
    else if (key == "dataset_path" || key == "dataset") config.dataset_path = value;
    else if (key == "user_col") config.columns.user_col = to_int(key, value);
    else if (key == "item_col") config.columns.item_col = to_int(key, value);
    else if (key == "value_col") config.columns.value_col = to_int(key, value);
    else if (key == "fp_threshold") config.columns.fp_threshold = to_double(key, value);
    else if (key == "users") config.synth_users = to_int(key, value);
    else if (key == "items") config.synth_items = to_int(key, value);
    else if (key == "latent_dim") config.synth_latent = to_int(key, value);
    else if (key == "density") config.synth_density = to_double(key, value);
    else if (key == "train_ratio") config.split.train = to_double(key, value);
    else if (key == "valid_ratio") config.split.validation = to_double(key, value);
    else if (key == "test_ratio") config.split.test = to_double(key, value);
    else if (key == "noise_rate") config.noise_rate = to_double(key, value);
    else if (key == "extra_fraction") config.extra_fraction = to_double(key, value);
    else if (key == "model") config.model.kind = model::model_kind_from_string(value);
    else if (key == "factors") config.model.factors = to_int(key, value);
    else if (key == "mlp_tower") config.model.mlp_tower = to_int_list(key, value);
    else if (key == "hidden") config.model.hidden = to_int(key, value);
    else if (key == "corruption") config.model.corruption = to_double(key, value);
    else if (key == "strategy") config.strategy = strategy_from_string(value);
    else if (key == "epsilon_max") config.epsilon_max = to_double(key, value);
    else if (key == "epsilon_n") config.epsilon_n = to_int64(key, value);
    else if (key == "beta") config.beta = to_double(key, value);
    else if (key == "learning_rate") config.learning_rate = to_double(key, value);
    else if (key == "batch_size") config.batch_size = to_int(key, value);
    else if (key == "negative_ratio") config.negative_ratio = to_int(key, value);
    else if (key == "epochs") config.epochs = to_int(key, value);
    else if (key == "warmup_epochs") config.warmup_epochs = to_int(key, value);
    else if (key == "finetune_epochs") config.finetune_epochs = to_int(key, value);
    else if (key == "lambda") config.colliding.lambda = to_double(key, value);
    else if (key == "neighbors") config.colliding.n_neighbors = to_int(key, value);
    else if (key == "ratio_threshold") config.colliding.ratio_threshold = to_double(key, value);
    else if (key == "eval_ks") config.eval_ks = to_int_list(key, value);
    else if (key == "activity_groups") config.activity_groups = to_int(key, value);
    else if (key == "seeds") config.seeds = parse_seeds(value);
    else if (key == "out_dir" || key == "out") config.out_dir = value;
    else throw std::invalid_argument("unknown config key: " + key);
  }
}

std::string config_hash(const ExperimentConfig& config) {
  const std::string dump = detail::config_to_json(config).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (unsigned char c : dump) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

data::Dataset build_dataset(const ExperimentConfig& config, std::uint64_t seed) {
  return stage("dataset", [&] {
    data::Dataset ds;
    if (config.dataset_path.empty()) {
      ds = data::synthesize_dataset(config.synth_users, config.synth_items,
                                    config.synth_latent, config.synth_density, seed);
    } else {
      ds = data::load_interactions(config.dataset_path, config.columns);
    }
    ds = data::split_holdout(ds, config.split, seed);
    if (config.noise_rate > 0) ds = data::inject_false_positives(ds, config.noise_rate, seed);
    if (config.extra_fraction > 0)
      ds = data::reveal_extra_feedback(ds, config.extra_fraction, seed);

    const bool needs_extra = config.tmpl == Template::kExtraFeedback ||
                             config.tmpl == Template::kColliding;
    if (needs_extra && count_extra(ds) == 0)
      throw std::runtime_error(
          "this template needs extra feedback but no record is marked (set "
          "extra_fraction > 0)");
    return ds;
  });
}

std::int64_t iterations_for_epochs(std::size_t pool_size, int batch_size, int epochs) {
  if (pool_size == 0) return 0;
  const auto per_epoch = static_cast<std::int64_t>(
      (pool_size + static_cast<std::size_t>(batch_size) - 1) /
      static_cast<std::size_t>(batch_size));
  return per_epoch * static_cast<std::int64_t>(epochs);
}

train::TrainConfig make_train_config(const ExperimentConfig& config,
                                     denoise::LossStrategy strategy, std::uint64_t seed,
                                     std::int64_t max_iterations) {
  train::TrainConfig tc;
  tc.model = config.model;
  tc.strategy = strategy;
  tc.schedule = denoise::DropRateSchedule::from_iterations(config.epsilon_max,
                                                           config.epsilon_n);
  tc.reweight.beta = config.beta;
  tc.learning_rate = config.learning_rate;
  tc.batch_size = config.batch_size;
  tc.negative_ratio = config.negative_ratio;
  tc.max_iterations = max_iterations;
  tc.seed = seed;
  return tc;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  if (config.seeds.empty()) throw std::invalid_argument("no seeds configured");
  if (config.epochs < 1) throw std::invalid_argument("epochs must be >= 1");

  ExperimentResult result;
  result.config = config;

  for (const std::uint64_t seed : config.seeds) {
    const data::Dataset ds = build_dataset(config, seed);
    const std::int64_t iters =
        iterations_for_epochs(ds.train.size(), config.batch_size, config.epochs);
    const ArmInputs in{config, ds, seed};
    SeedOutput so;
    so.seed = seed;

    switch (config.tmpl) {
      case Template::kCleanVsNormal: {
        auto normal = stage("train:normal", [&] {
          return train::train(ds, make_train_config(config, denoise::LossStrategy::kCe,
                                                     seed, iters));
        });
        so.arms.push_back(evaluate_arm(in, "normal", normal.snapshot,
                                       std::move(normal.loss_log),
                                       std::move(normal.drop_log)));
        auto clean = stage("train:clean", [&] {
          return train::train_clean(ds, make_train_config(config,
                                                          denoise::LossStrategy::kCe,
                                                          seed, iters));
        });
        so.arms.push_back(evaluate_arm(in, "clean", clean.snapshot,
                                       std::move(clean.loss_log),
                                       std::move(clean.drop_log)));
        break;
      }

      case Template::kAdtCompare: {
        for (const auto s : {denoise::LossStrategy::kCe, denoise::LossStrategy::kTruncatedCe,
                             denoise::LossStrategy::kReweightedCe}) {
          const std::string name = strategy_name(s);
          auto r = stage("train:" + name, [&] {
            return train::train(ds, make_train_config(config, s, seed, iters));
          });
          so.arms.push_back(evaluate_arm(in, name, r.snapshot, std::move(r.loss_log),
                                         std::move(r.drop_log)));
        }
        break;
      }

      case Template::kExtraFeedback: {
        const std::string base = strategy_name(config.strategy);
        const std::size_t n_extra = count_extra(ds);
        auto plain = stage("train:" + base, [&] {
          return train::train(ds, make_train_config(config, config.strategy, seed, iters));
        });

        const std::int64_t ft_iters =
            iterations_for_epochs(n_extra, config.batch_size, config.finetune_epochs);
        auto tuned = stage("train:" + base + "+finetune", [&] {
          return train::finetune(plain.snapshot, ds,
                                 make_train_config(config, denoise::LossStrategy::kCe,
                                                   seed, ft_iters));
        });

        const std::int64_t warm_iters =
            iterations_for_epochs(n_extra, config.batch_size, config.warmup_epochs);
        auto warm = stage("train:" + base + "+warmup", [&] {
          return train::warmup_then_train(
              ds, make_train_config(config, denoise::LossStrategy::kCe, seed, warm_iters),
              make_train_config(config, config.strategy, seed, iters));
        });

        so.arms.push_back(evaluate_arm(in, base, plain.snapshot,
                                       std::move(plain.loss_log),
                                       std::move(plain.drop_log)));
        so.arms.push_back(evaluate_arm(in, base + "+finetune", tuned, {}, {}));
        so.arms.push_back(evaluate_arm(in, base + "+warmup", warm.result.snapshot,
                                       std::move(warm.result.loss_log),
                                       std::move(warm.result.drop_log)));
        break;
      }

      case Template::kColliding: {
        const std::size_t n_extra = count_extra(ds);
        const std::int64_t warm_iters =
            iterations_for_epochs(n_extra, config.batch_size, config.warmup_epochs);
        auto warm = stage("train:warmup", [&] {
          return train::warmup_then_train(
              ds, make_train_config(config, denoise::LossStrategy::kCe, seed, warm_iters),
              make_train_config(config, config.strategy, seed, iters));
        });

        const auto index = stage("evaluate:neighbor-index", [&] {
          return colliding::build_neighbor_index(warm.warm, ds, config.colliding);
        });
        const auto counts = extra_counts(ds);
        std::vector<std::int32_t> gated_users;
        for (std::int32_t u = 0; u < ds.n_users; ++u) {
          const auto& [extra, total] = counts[static_cast<std::size_t>(u)];
          if (total == 0) continue;
          if (static_cast<double>(extra) / static_cast<double>(total) <
              config.colliding.ratio_threshold)
            gated_users.push_back(u);
        }

        const auto& final_snap = warm.result.snapshot;
        const eval::Scorer plain = plain_scorer(final_snap, ds);
        const eval::Scorer fused = [&](std::int32_t u) {
          return colliding::infer_with_colliding(final_snap, ds, index, config.colliding, u);
        };

        eval::EvalOptions opts;
        opts.ks = config.eval_ks;
        opts.activity_groups = config.activity_groups;
        eval::EvalOptions gated_opts = opts;
        gated_opts.activity_groups = 0;
        gated_opts.user_subset = gated_users;

        ArmOutput arm_plain;
        arm_plain.name = "warmup";
        arm_plain.report = stage("evaluate:warmup",
                                 [&] { return eval::evaluate(plain, ds, opts); });
        arm_plain.gated = stage("evaluate:warmup(gated)", [&] {
          return eval::evaluate(plain, ds, gated_opts).overall;
        });
        arm_plain.loss_log = std::move(warm.result.loss_log);
        arm_plain.drop_log = std::move(warm.result.drop_log);
        arm_plain.report.config_hash = config_hash(config);
        arm_plain.report.seed = seed;
        if (!arm_plain.drop_log.entries.empty() && ds.has_noise_flags())
          arm_plain.report.denoise =
              eval::denoise_precision_recall(arm_plain.drop_log, ds);

        ArmOutput arm_fused;
        arm_fused.name = "warmup+colliding";
        arm_fused.report = stage("evaluate:warmup+colliding",
                                 [&] { return eval::evaluate(fused, ds, opts); });
        arm_fused.gated = stage("evaluate:warmup+colliding(gated)", [&] {
          return eval::evaluate(fused, ds, gated_opts).overall;
        });
        arm_fused.report.config_hash = config_hash(config);
        arm_fused.report.seed = seed;

        so.arms.push_back(std::move(arm_plain));
        so.arms.push_back(std::move(arm_fused));
        break;
      }
    }
    result.seeds.push_back(std::move(so));
  }
  return result;
}

MetricSummary summarize(const std::vector<double>& per_seed) {
  if (per_seed.empty())
    throw std::invalid_argument("summarize needs at least one per-seed value");
  MetricSummary s;
  s.per_seed = per_seed;
  s.mean = std::accumulate(per_seed.begin(), per_seed.end(), 0.0) /
           static_cast<double>(per_seed.size());
  if (per_seed.size() > 1) {
    double ss = 0;
    for (double v : per_seed) ss += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(ss / static_cast<double>(per_seed.size() - 1));
  }
  return s;
}

}  // namespace adt::experiment
