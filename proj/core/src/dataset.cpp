#include "adt/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>

#include "adt/rng.hpp"

namespace adt::data {
namespace {

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, '\t')) out.push_back(field);
  return out;
}

void validate_ratios(const SplitRatios& r) {
  if (r.train < 0 || r.validation < 0 || r.test < 0)
    throw std::invalid_argument("split ratios must be non-negative");
  if (std::abs(r.train + r.validation + r.test - 1.0) > 1e-9)
    throw std::invalid_argument("split ratios must sum to 1");
}

std::uint64_t pair_key(std::int32_t user, std::int64_t n_items, std::int32_t item) {
  return static_cast<std::uint64_t>(user) * static_cast<std::uint64_t>(n_items) +
         static_cast<std::uint64_t>(item);
}

}  // namespace

bool operator==(const InteractionRecord& a, const InteractionRecord& b) {
  return a.user == b.user && a.item == b.item && a.noise_flag == b.noise_flag &&
         a.extra == b.extra;
}

void Dataset::rebuild_user_pos() {
  user_pos.assign(static_cast<std::size_t>(n_users), {});
  for (const auto& r : train) user_pos[static_cast<std::size_t>(r.user)].push_back(r.item);
  for (auto& items : user_pos) std::sort(items.begin(), items.end());
}

bool Dataset::user_has_item(std::int32_t user, std::int32_t item) const {
  const auto& items = user_pos[static_cast<std::size_t>(user)];
  return std::binary_search(items.begin(), items.end(), item);
}

bool Dataset::has_noise_flags() const {
  if (train.empty()) return false;
  return std::all_of(train.begin(), train.end(),
                     [](const InteractionRecord& r) { return r.noise_flag.has_value(); });
}

std::vector<InteractionRecord> Dataset::all_records() const {
  std::vector<InteractionRecord> out;
  out.reserve(train.size() + validation.size() + test.size());
  out.insert(out.end(), train.begin(), train.end());
  out.insert(out.end(), validation.begin(), validation.end());
  out.insert(out.end(), test.begin(), test.end());
  return out;
}

Dataset load_interactions(const std::string& path, const ColumnSpec& spec) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open interaction file: " + path);

  const int max_col = std::max({spec.user_col, spec.item_col, spec.value_col});
  std::unordered_map<std::string, std::int32_t> user_ids, item_ids;
  std::vector<InteractionRecord> records;
  // (user, item) -> index into records; duplicates overwrite in place (last wins).
  std::unordered_map<std::uint64_t, std::size_t> seen;

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_tabs(line);
    if (static_cast<int>(fields.size()) <= max_col)
      throw std::runtime_error("line " + std::to_string(line_no) + ": expected at least " +
                               std::to_string(max_col + 1) + " tab-separated columns");

    const auto intern = [](std::unordered_map<std::string, std::int32_t>& ids,
                           const std::string& token) {
      return ids.emplace(token, static_cast<std::int32_t>(ids.size())).first->second;
    };
    InteractionRecord rec;
    rec.user = intern(user_ids, fields[static_cast<std::size_t>(spec.user_col)]);
    rec.item = intern(item_ids, fields[static_cast<std::size_t>(spec.item_col)]);
    if (spec.value_col >= 0) {
      double value = 0;
      try {
        std::size_t pos = 0;
        value = std::stod(fields[static_cast<std::size_t>(spec.value_col)], &pos);
        if (pos != fields[static_cast<std::size_t>(spec.value_col)].size())
          throw std::invalid_argument("trailing characters");
      } catch (const std::exception&) {
        throw std::runtime_error("line " + std::to_string(line_no) +
                                 ": cannot parse feedback value '" +
                                 fields[static_cast<std::size_t>(spec.value_col)] + "'");
      }
      rec.noise_flag = value < spec.fp_threshold ? std::uint8_t{0} : std::uint8_t{1};
    }

    const std::uint64_t key =
        (static_cast<std::uint64_t>(rec.user) << 32) | static_cast<std::uint32_t>(rec.item);
    if (auto it = seen.find(key); it != seen.end()) {
      records[it->second] = rec;
    } else {
      seen.emplace(key, records.size());
      records.push_back(rec);
    }
  }

  Dataset ds;
  ds.n_users = static_cast<std::int32_t>(user_ids.size());
  ds.n_items = static_cast<std::int32_t>(item_ids.size());
  ds.train = std::move(records);
  ds.rebuild_user_pos();
  return ds;
}

void apply_flags_file(Dataset& dataset, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open flags file: " + path);

  std::unordered_map<std::uint64_t, std::pair<std::optional<std::uint8_t>, bool>> flags;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::int64_t user = 0, item = 0;
    int noise = 0, extra = 0;
    if (!(ss >> user >> item >> noise >> extra))
      throw std::runtime_error("flags line " + std::to_string(line_no) + ": malformed");
    std::optional<std::uint8_t> flag;
    if (noise >= 0) flag = static_cast<std::uint8_t>(noise);
    flags[(static_cast<std::uint64_t>(user) << 32) | static_cast<std::uint32_t>(item)] = {
        flag, extra != 0};
  }

  const auto apply = [&](std::vector<InteractionRecord>& part) {
    for (auto& r : part) {
      const std::uint64_t key =
          (static_cast<std::uint64_t>(r.user) << 32) | static_cast<std::uint32_t>(r.item);
      if (auto it = flags.find(key); it != flags.end()) {
        r.noise_flag = it->second.first;
        r.extra = it->second.second;
      }
    }
  };
  apply(dataset.train);
  apply(dataset.validation);
  apply(dataset.test);
}

void save_dataset(const Dataset& dataset, const std::string& tsv_path,
                  const std::string& flags_path) {
  std::ofstream tsv(tsv_path);
  if (!tsv) throw std::runtime_error("cannot write " + tsv_path);
  std::ofstream flags(flags_path);
  if (!flags) throw std::runtime_error("cannot write " + flags_path);

  // Ids are written renumbered to first-appearance order — the numbering the
  // loader will reproduce — so the flags sidecar keys match after a reload
  // even when the in-memory ids are not in appearance order.
  std::unordered_map<std::int32_t, std::int32_t> user_map, item_map;
  const auto renumber = [](std::unordered_map<std::int32_t, std::int32_t>& map,
                           std::int32_t id) {
    return map.emplace(id, static_cast<std::int32_t>(map.size())).first->second;
  };

  for (const auto& r : dataset.all_records()) {
    const std::int32_t user = renumber(user_map, r.user);
    const std::int32_t item = renumber(item_map, r.item);
    tsv << user << '\t' << item << '\n';
    flags << user << ' ' << item << ' '
          << (r.noise_flag ? static_cast<int>(*r.noise_flag) : -1) << ' '
          << (r.extra ? 1 : 0) << '\n';
  }
  if (!tsv || !flags) throw std::runtime_error("short write while saving dataset");
}

Dataset split_holdout(const Dataset& source, const SplitRatios& ratios, std::uint64_t seed) {
  validate_ratios(ratios);
  Dataset out;
  out.n_users = source.n_users;
  out.n_items = source.n_items;

  std::vector<std::vector<InteractionRecord>> per_user(
      static_cast<std::size_t>(source.n_users));
  for (const auto& r : source.all_records())
    per_user[static_cast<std::size_t>(r.user)].push_back(r);

  auto rng = make_rng(seed, RngStream::kSplit);
  for (auto& recs : per_user) {
    const std::size_t n = recs.size();
    if (n == 0) continue;
    if (n < 3) {  // too few interactions to hold anything out
      out.train.insert(out.train.end(), recs.begin(), recs.end());
      continue;
    }
    const auto n_test = static_cast<std::size_t>(
        std::floor(static_cast<double>(n) * ratios.test));
    const auto n_valid = static_cast<std::size_t>(
        std::floor(static_cast<double>(n) * ratios.validation));
    std::shuffle(recs.begin(), recs.end(), rng);
    for (std::size_t i = 0; i < n; ++i) {
      if (i < n_test) {
        // Clean-test protocol: records known to be false positives never enter
        // the test partition; they are discarded from the holdout slice.
        if (!recs[i].noise_flag || *recs[i].noise_flag == 1) out.test.push_back(recs[i]);
      } else if (i < n_test + n_valid) {
        out.validation.push_back(recs[i]);
      } else {
        out.train.push_back(recs[i]);
      }
    }
  }

  if (out.test.empty() && !source.all_records().empty())
    std::cerr << "[adt::data] warning: test partition is empty after split "
                 "(no clean records were held out)\n";
  out.rebuild_user_pos();
  return out;
}

Batch sample_negatives(std::vector<InteractionRecord> positives, const Dataset& dataset,
                       int ratio, std::mt19937_64& rng) {
  if (ratio < 1) throw std::invalid_argument("negative ratio must be >= 1");
  Batch batch;
  batch.positives = std::move(positives);
  batch.negatives.reserve(batch.positives.size() * static_cast<std::size_t>(ratio));

  std::uniform_int_distribution<std::int32_t> pick(0, dataset.n_items - 1);
  for (const auto& pos : batch.positives) {
    const auto& owned = dataset.user_pos[static_cast<std::size_t>(pos.user)];
    if (static_cast<std::int32_t>(owned.size()) >= dataset.n_items)
      throw std::runtime_error("user " + std::to_string(pos.user) +
                               " interacted with every item; cannot sample negatives");
    for (int r = 0; r < ratio; ++r) {
      std::int32_t item = pick(rng);
      while (dataset.user_has_item(pos.user, item)) item = pick(rng);
      batch.negatives.emplace_back(pos.user, item);
    }
  }
  return batch;
}

Dataset synthesize_dataset(std::int32_t n_users, std::int32_t n_items, int latent_dim,
                           double density, std::uint64_t seed) {
  if (n_users < 1 || n_items < 1) throw std::invalid_argument("need at least one user and item");
  if (latent_dim < 1) throw std::invalid_argument("latent_dim must be >= 1");
  if (density <= 0 || density > 1) throw std::invalid_argument("density must lie in (0, 1]");
  if (density * n_items < 1)
    throw std::invalid_argument("density * n_items < 1: every user would get zero positives");

  const auto k = std::min<std::int32_t>(
      n_items, static_cast<std::int32_t>(std::ceil(density * n_items)));

  auto rng = make_rng(seed, RngStream::kSynthesis);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> users(static_cast<std::size_t>(n_users) * latent_dim);
  std::vector<double> items(static_cast<std::size_t>(n_items) * latent_dim);
  for (auto& v : users) v = gauss(rng);
  for (auto& v : items) v = gauss(rng);

  Dataset ds;
  ds.n_users = n_users;
  ds.n_items = n_items;
  ds.train.reserve(static_cast<std::size_t>(n_users) * k);

  std::vector<std::int32_t> order(static_cast<std::size_t>(n_items));
  std::vector<double> scores(static_cast<std::size_t>(n_items));
  for (std::int32_t u = 0; u < n_users; ++u) {
    const double* uv = users.data() + static_cast<std::size_t>(u) * latent_dim;
    for (std::int32_t i = 0; i < n_items; ++i) {
      const double* iv = items.data() + static_cast<std::size_t>(i) * latent_dim;
      double dot = 0;
      for (int d = 0; d < latent_dim; ++d) dot += uv[d] * iv[d];
      scores[static_cast<std::size_t>(i)] = dot;
      order[static_cast<std::size_t>(i)] = i;
    }
    std::partial_sort(order.begin(), order.begin() + k, order.end(),
                      [&](std::int32_t a, std::int32_t b) {
                        const double sa = scores[static_cast<std::size_t>(a)];
                        const double sb = scores[static_cast<std::size_t>(b)];
                        return sa > sb || (sa == sb && a < b);
                      });
    std::vector<std::int32_t> top(order.begin(), order.begin() + k);
    std::sort(top.begin(), top.end());
    for (std::int32_t item : top)
      ds.train.push_back({u, item, std::uint8_t{1}, false});
  }
  ds.rebuild_user_pos();
  return ds;
}

Dataset inject_false_positives(const Dataset& dataset, double rate, std::uint64_t seed) {
  if (rate < 0 || rate >= 1) throw std::invalid_argument("noise rate must lie in [0, 1)");
  Dataset out = dataset;
  if (rate == 0 || dataset.train.empty()) return out;

  // Pairs present in any partition are off limits.
  std::vector<std::vector<std::int32_t>> occupied(static_cast<std::size_t>(dataset.n_users));
  for (const auto& r : dataset.all_records())
    occupied[static_cast<std::size_t>(r.user)].push_back(r.item);
  std::uint64_t free_total = 0;
  for (auto& items : occupied) {
    std::sort(items.begin(), items.end());
    items.erase(std::unique(items.begin(), items.end()), items.end());
    free_total += static_cast<std::uint64_t>(dataset.n_items) - items.size();
  }

  const auto wanted = static_cast<std::uint64_t>(
      std::ceil(rate * static_cast<double>(dataset.train.size()) / (1.0 - rate)));
  if (wanted > free_total)
    throw std::runtime_error("cannot inject " + std::to_string(wanted) +
                             " false positives: only " + std::to_string(free_total) +
                             " free (user, item) pairs remain");

  auto rng = make_rng(seed, RngStream::kInject);
  const auto is_occupied = [&](std::int32_t u, std::int32_t i) {
    const auto& items = occupied[static_cast<std::size_t>(u)];
    return std::binary_search(items.begin(), items.end(), i);
  };

  const double free_fraction =
      static_cast<double>(free_total) /
      (static_cast<double>(dataset.n_users) * static_cast<double>(dataset.n_items));
  if (free_fraction < 0.1) {
    // Dense corpus: rejection sampling would crawl, so select directly from the
    // enumerated free pairs (selection sampling keeps the draw reproducible).
    std::uint64_t remaining = free_total, needed = wanted;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (std::int32_t u = 0; u < dataset.n_users && needed > 0; ++u)
      for (std::int32_t i = 0; i < dataset.n_items && needed > 0; ++i) {
        if (is_occupied(u, i)) continue;
        if (unit(rng) * static_cast<double>(remaining) < static_cast<double>(needed)) {
          out.train.push_back({u, i, std::uint8_t{0}, false});
          --needed;
        }
        --remaining;
      }
  } else {
    std::uniform_int_distribution<std::int32_t> pick_user(0, dataset.n_users - 1);
    std::uniform_int_distribution<std::int32_t> pick_item(0, dataset.n_items - 1);
    std::unordered_set<std::uint64_t> injected;
    injected.reserve(wanted * 2);
    while (injected.size() < wanted) {
      const std::int32_t u = pick_user(rng);
      const std::int32_t i = pick_item(rng);
      if (is_occupied(u, i)) continue;
      if (!injected.insert(pair_key(u, dataset.n_items, i)).second) continue;
      out.train.push_back({u, i, std::uint8_t{0}, false});
    }
  }
  out.rebuild_user_pos();
  return out;
}

Dataset reveal_extra_feedback(const Dataset& dataset, double fraction, std::uint64_t seed) {
  if (fraction < 0 || fraction > 1) throw std::invalid_argument("fraction must lie in [0, 1]");
  Dataset out = dataset;
  std::vector<std::size_t> candidates;
  for (std::size_t idx = 0; idx < out.train.size(); ++idx) {
    const auto& r = out.train[idx];
    // Only records known to be true positives qualify; on unflagged data every
    // record is a candidate.
    if (!r.noise_flag || *r.noise_flag == 1) candidates.push_back(idx);
  }
  const auto k = static_cast<std::size_t>(
      std::llround(fraction * static_cast<double>(candidates.size())));
  auto rng = make_rng(seed, RngStream::kReveal);
  std::shuffle(candidates.begin(), candidates.end(), rng);
  for (std::size_t j = 0; j < k; ++j) out.train[candidates[j]].extra = true;
  return out;
}

}  // namespace adt::data
