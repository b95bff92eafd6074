#include "adt/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <stdexcept>

namespace adt::eval {
namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

std::vector<std::int32_t> rank_items(const Eigen::VectorXd& scores,
                                     const std::vector<std::int32_t>& exclude, int k) {
  if (k < 1) throw std::invalid_argument("k must be >= 1");
  std::vector<std::int32_t> candidates;
  candidates.reserve(static_cast<std::size_t>(scores.size()));
  for (std::int32_t i = 0; i < static_cast<std::int32_t>(scores.size()); ++i)
    if (!std::binary_search(exclude.begin(), exclude.end(), i)) candidates.push_back(i);
  if (static_cast<std::size_t>(k) > candidates.size())
    throw std::invalid_argument("k exceeds the candidate count after exclusions");

  std::partial_sort(candidates.begin(), candidates.begin() + k, candidates.end(),
                    [&scores](std::int32_t a, std::int32_t b) {
                      return scores(a) > scores(b) || (scores(a) == scores(b) && a < b);
                    });
  candidates.resize(static_cast<std::size_t>(k));
  return candidates;
}

double recall_at_k(const std::vector<std::int32_t>& ranked,
                   const std::unordered_set<std::int32_t>& relevant, int k) {
  if (k < 1) throw std::invalid_argument("k must be >= 1");
  if (relevant.empty()) throw std::invalid_argument("relevant set is empty");
  const auto take = std::min<std::size_t>(static_cast<std::size_t>(k), ranked.size());
  std::size_t hits = 0;
  for (std::size_t t = 0; t < take; ++t)
    if (relevant.count(ranked[t])) ++hits;
  return static_cast<double>(hits) / static_cast<double>(relevant.size());
}

double ndcg_at_k(const std::vector<std::int32_t>& ranked,
                 const std::unordered_set<std::int32_t>& relevant, int k) {
  if (k < 1) throw std::invalid_argument("k must be >= 1");
  if (relevant.empty()) throw std::invalid_argument("relevant set is empty");
  const auto take = std::min<std::size_t>(static_cast<std::size_t>(k), ranked.size());
  double dcg = 0;
  for (std::size_t t = 0; t < take; ++t)
    if (relevant.count(ranked[t])) dcg += 1.0 / std::log2(static_cast<double>(t) + 2.0);
  const auto ideal = std::min<std::size_t>(static_cast<std::size_t>(k), relevant.size());
  double idcg = 0;
  for (std::size_t t = 0; t < ideal; ++t) idcg += 1.0 / std::log2(static_cast<double>(t) + 2.0);
  return dcg / idcg;
}

EvalReport evaluate(const Scorer& scorer, const data::Dataset& dataset,
                    const EvalOptions& options) {
  if (options.ks.empty()) throw std::invalid_argument("no cutoffs requested");
  for (int k : options.ks)
    if (k < 1) throw std::invalid_argument("cutoffs must be >= 1");

  std::vector<std::unordered_set<std::int32_t>> relevant(
      static_cast<std::size_t>(dataset.n_users));
  for (const auto& r : dataset.test)
    relevant[static_cast<std::size_t>(r.user)].insert(r.item);

  std::vector<std::int32_t> users;
  if (options.user_subset) {
    users = *options.user_subset;
  } else {
    users.resize(static_cast<std::size_t>(dataset.n_users));
    std::iota(users.begin(), users.end(), 0);
  }

  std::vector<int> group_of;
  int n_groups = 0;
  if (options.activity_groups >= 2) {
    group_of = group_users_by_activity(dataset, options.activity_groups);
    n_groups = options.activity_groups;
  }

  const int k_max = *std::max_element(options.ks.begin(), options.ks.end());
  struct Accum {
    std::map<int, double> recall, ndcg;
    std::int32_t evaluated = 0, skipped = 0;
  };
  Accum overall;
  std::vector<Accum> groups(static_cast<std::size_t>(n_groups));

  for (std::int32_t u : users) {
    if (u < 0 || u >= dataset.n_users) throw std::out_of_range("user id out of range");
    Accum* group = n_groups > 0 ? &groups[static_cast<std::size_t>(
                                      group_of[static_cast<std::size_t>(u)])]
                                : nullptr;
    const auto& rel = relevant[static_cast<std::size_t>(u)];
    if (rel.empty()) {
      ++overall.skipped;
      if (group) ++group->skipped;
      continue;
    }
    const auto& exclude = dataset.user_pos[static_cast<std::size_t>(u)];
    const int candidates = dataset.n_items - static_cast<int>(exclude.size());
    const int k_eff = std::min(k_max, candidates);
    if (k_eff < 1) {
      ++overall.skipped;
      if (group) ++group->skipped;
      continue;
    }
    const Eigen::VectorXd scores = scorer(u);
    if (scores.size() != dataset.n_items)
      throw std::invalid_argument("scorer returned a vector of the wrong length");
    const auto ranked = rank_items(scores, exclude, k_eff);
    for (int k : options.ks) {
      const double r = recall_at_k(ranked, rel, k);
      const double n = ndcg_at_k(ranked, rel, k);
      overall.recall[k] += r;
      overall.ndcg[k] += n;
      if (group) {
        group->recall[k] += r;
        group->ndcg[k] += n;
      }
    }
    ++overall.evaluated;
    if (group) ++group->evaluated;
  }

  const auto finish = [&](const Accum& a) {
    MetricTable t;
    t.users_evaluated = a.evaluated;
    t.users_skipped = a.skipped;
    for (int k : options.ks) {
      const double denom = a.evaluated > 0 ? static_cast<double>(a.evaluated) : 1.0;
      t.recall[k] = a.evaluated > 0 ? a.recall.at(k) / denom : 0.0;
      t.ndcg[k] = a.evaluated > 0 ? a.ndcg.at(k) / denom : 0.0;
    }
    return t;
  };

  EvalReport report;
  report.overall = finish(overall);
  for (const auto& g : groups) report.by_activity.push_back(finish(g));
  return report;
}

std::vector<DenoiseDiagRow> denoise_precision_recall(const train::DropLog& drop_log,
                                                     const data::Dataset& dataset) {
  if (!dataset.has_noise_flags())
    throw std::invalid_argument("denoise diagnostics need noise flags on the dataset");
  if (!drop_log.has_flags)
    throw std::invalid_argument("drop log was recorded without noise flags");

  std::vector<DenoiseDiagRow> rows;
  std::int64_t seen_pos = 0, seen_fp = 0, dropped = 0, dropped_fp = 0;
  for (std::size_t k = 0; k < drop_log.entries.size(); ++k) {
    const auto& e = drop_log.entries[k];
    seen_pos += e.n_pos;
    seen_fp += e.n_fp_pos;
    dropped += e.n_dropped;
    dropped_fp += e.n_dropped_fp;
    const bool epoch_end =
        k + 1 == drop_log.entries.size() || drop_log.entries[k + 1].epoch != e.epoch;
    if (!epoch_end) continue;

    DenoiseDiagRow row;
    row.epoch = e.epoch;
    row.recall = seen_fp > 0
                     ? static_cast<double>(dropped_fp) / static_cast<double>(seen_fp)
                     : 0.0;
    row.precision_defined = dropped > 0;
    row.precision = row.precision_defined
                        ? static_cast<double>(dropped_fp) / static_cast<double>(dropped)
                        : 0.0;
    // Random truncation at the same budget: recall equals the fraction dropped,
    // precision equals the false-positive share of the stream.
    row.baseline_recall = seen_pos > 0
                              ? static_cast<double>(dropped) / static_cast<double>(seen_pos)
                              : 0.0;
    row.baseline_precision =
        seen_pos > 0 ? static_cast<double>(seen_fp) / static_cast<double>(seen_pos) : 0.0;
    rows.push_back(row);
  }
  return rows;
}

void write_denoise_csv(const std::vector<DenoiseDiagRow>& rows, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "epoch,recall,precision,precision_defined,baseline_recall,baseline_precision\n";
  for (const auto& r : rows)
    out << r.epoch << ',' << fmt(r.recall) << ',' << fmt(r.precision) << ','
        << (r.precision_defined ? 1 : 0) << ',' << fmt(r.baseline_recall) << ','
        << fmt(r.baseline_precision) << '\n';
  if (!out) throw std::runtime_error("short write: " + path);
}

std::vector<int> group_users_by_activity(const data::Dataset& dataset, int n_groups) {
  if (n_groups < 1) throw std::invalid_argument("n_groups must be >= 1");

  std::vector<std::int64_t> count(static_cast<std::size_t>(dataset.n_users), 0);
  for (const auto& r : dataset.train) ++count[static_cast<std::size_t>(r.user)];
  std::vector<std::int32_t> order(static_cast<std::size_t>(dataset.n_users));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::int32_t a, std::int32_t b) {
    return count[static_cast<std::size_t>(a)] > count[static_cast<std::size_t>(b)] ||
           (count[static_cast<std::size_t>(a)] == count[static_cast<std::size_t>(b)] &&
            a < b);
  });

  const double total = static_cast<double>(
      std::accumulate(count.begin(), count.end(), std::int64_t{0}));
  const double target = total / static_cast<double>(n_groups);

  std::vector<int> group(static_cast<std::size_t>(dataset.n_users), 0);
  int g = 0;
  double mass = 0;
  for (std::int32_t u : order) {
    group[static_cast<std::size_t>(u)] = g;
    mass += static_cast<double>(count[static_cast<std::size_t>(u)]);
    // Close the group once it holds its share of the interaction mass.
    if (mass >= target && g < n_groups - 1) {
      ++g;
      mass = 0;
    }
  }
  return group;
}

}  // namespace adt::eval
