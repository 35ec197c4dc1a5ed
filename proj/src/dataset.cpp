#include "gtopt/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "gtopt/format.hpp"

namespace gtopt {

std::size_t Dataset::count(int label) const {
  return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), label));
}

Dataset synthetic_two_gaussian(std::size_t samples, std::size_t dim, double separation,
                               std::uint64_t seed) {
  if (samples < 2 || dim == 0) throw ParameterError("synthetic data needs >= 2 samples and dim >= 1");
  Rng rng(seed, 0);
  Vector direction(static_cast<Eigen::Index>(dim));
  for (auto& v : direction) v = rng.normal();
  direction.normalize();

  Dataset data;
  data.features.resize(static_cast<Eigen::Index>(samples), static_cast<Eigen::Index>(dim));
  data.labels.resize(samples);
  const std::size_t negatives = samples / 2;
  for (std::size_t s = 0; s < samples; ++s) {
    const int y = s < negatives ? -1 : 1;
    data.labels[s] = y;
    for (std::size_t c = 0; c < dim; ++c) {
      const auto ci = static_cast<Eigen::Index>(c);
      data.features(static_cast<Eigen::Index>(s), ci) = 0.5 * separation * y * direction(ci) + rng.normal();
    }
  }
  return data;
}

void standardize(Dataset& data) {
  const auto rows = data.features.rows();
  if (rows == 0) return;
  for (Eigen::Index c = 0; c < data.features.cols(); ++c) {
    auto col = data.features.col(c);
    const double mean = col.mean();
    col.array() -= mean;
    const double sd = std::sqrt(col.squaredNorm() / static_cast<double>(rows));
    if (sd > 0.0) col /= sd;
  }
}

LabelMap parse_label_map(const std::string& spec) {
  LabelMap map;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw ConfigError("label map entry without ':' in '" + spec + "'");
    const double target = parse_double(item.substr(colon + 1));
    if (target != -1.0 && target != 1.0) throw ConfigError("label map targets must be -1 or +1");
    std::string key = item.substr(0, colon);
    key.erase(0, key.find_first_not_of(' '));
    key.erase(key.find_last_not_of(' ') + 1);
    map[key] = static_cast<int>(target);
  }
  return map;
}

namespace {

int map_label(const std::string& raw, const LabelMap& label_map, std::size_t line) {
  if (label_map.empty()) {
    const double v = parse_double(raw);
    if (v == -1.0 || v == 1.0) return static_cast<int>(v);
  } else if (auto it = label_map.find(raw); it != label_map.end()) {
    return it->second;
  }
  throw IoError("dataset line " + std::to_string(line) + ": unmapped label '" + raw + "'");
}

}  // namespace

Dataset ingest_dataset(std::istream& in, const LabelMap& label_map, bool normalize) {
  std::vector<int> labels;
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::getline(ss, cell, ',');
    cell.erase(0, cell.find_first_not_of(' '));
    cell.erase(cell.find_last_not_of(' ') + 1);
    labels.push_back(map_label(cell, label_map, lineno));
    std::vector<double> row;
    while (std::getline(ss, cell, ',')) row.push_back(parse_double(cell));
    if (!rows.empty() && row.size() != rows.front().size())
      throw IoError("dataset line " + std::to_string(lineno) + ": expected " +
                    std::to_string(rows.front().size()) + " features, got " + std::to_string(row.size()));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw IoError("dataset is empty");
  if (rows.front().empty()) throw IoError("dataset rows carry no features");

  Dataset data;
  data.labels = std::move(labels);
  data.features.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t s = 0; s < rows.size(); ++s)
    for (std::size_t c = 0; c < rows[s].size(); ++c)
      data.features(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(c)) = rows[s][c];
  if (normalize) standardize(data);
  return data;
}

Dataset ingest_dataset(const std::string& path, const LabelMap& label_map, bool normalize) {
  std::ifstream in(path);
  if (!in) throw IoError("file not found: " + path);
  return ingest_dataset(in, label_map, normalize);
}

void write_dataset_csv(std::ostream& out, const Dataset& data) {
  for (std::size_t s = 0; s < data.size(); ++s) {
    out << data.labels[s];
    for (Eigen::Index c = 0; c < data.features.cols(); ++c)
      out << ',' << format_double(data.features(static_cast<Eigen::Index>(s), c));
    out << '\n';
  }
}

PartitionMode parse_partition_mode(const std::string& s) {
  if (s == "one-class-per-node") return PartitionMode::one_class_per_node;
  if (s == "iid-shuffle") return PartitionMode::iid_shuffle;
  throw ConfigError("unknown partition mode '" + s + "'");
}

std::string to_string(PartitionMode mode) {
  return mode == PartitionMode::one_class_per_node ? "one-class-per-node" : "iid-shuffle";
}

namespace {

Dataset take_rows(const Dataset& data, const std::vector<std::size_t>& rows) {
  Dataset shard;
  shard.features.resize(static_cast<Eigen::Index>(rows.size()), data.features.cols());
  shard.labels.reserve(rows.size());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    shard.features.row(static_cast<Eigen::Index>(k)) = data.features.row(static_cast<Eigen::Index>(rows[k]));
    shard.labels.push_back(data.labels[rows[k]]);
  }
  return shard;
}

}  // namespace

std::vector<Dataset> partition_dataset(const Dataset& data, std::size_t n, std::size_t per_node,
                                       PartitionMode mode, std::uint64_t seed) {
  if (n == 0) throw ParameterError("partition needs at least one node");
  if (n == 1) return {data};
  if (per_node == 0) throw ParameterError("per-node sample quota must be positive");

  Rng rng(seed, 0);
  std::vector<std::vector<std::size_t>> assignment(n);

  if (mode == PartitionMode::iid_shuffle) {
    if (n * per_node > data.size())
      throw PartitionError("iid-shuffle needs " + std::to_string(n * per_node) + " samples, have " +
                           std::to_string(data.size()));
    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng.engine());
    for (std::size_t k = 0; k < n * per_node; ++k) assignment[k % n].push_back(order[k]);
  } else {
    std::vector<std::size_t> neg, pos;
    for (std::size_t s = 0; s < data.size(); ++s) (data.labels[s] < 0 ? neg : pos).push_back(s);
    const std::size_t neg_nodes = n / 2;
    const std::size_t pos_nodes = n - neg_nodes;
    if (neg.size() < neg_nodes * per_node)
      throw PartitionError("class -1 has " + std::to_string(neg.size()) + " samples, needs " +
                           std::to_string(neg_nodes * per_node));
    if (pos.size() < pos_nodes * per_node)
      throw PartitionError("class +1 has " + std::to_string(pos.size()) + " samples, needs " +
                           std::to_string(pos_nodes * per_node));
    std::shuffle(neg.begin(), neg.end(), rng.engine());
    std::shuffle(pos.begin(), pos.end(), rng.engine());
    std::vector<int> node_class(n, 1);
    std::fill(node_class.begin(), node_class.begin() + static_cast<std::ptrdiff_t>(neg_nodes), -1);
    std::shuffle(node_class.begin(), node_class.end(), rng.engine());
    std::size_t next_neg = 0, next_pos = 0;
    for (std::size_t i = 0; i < n; ++i) {
      auto& pool = node_class[i] < 0 ? neg : pos;
      auto& next = node_class[i] < 0 ? next_neg : next_pos;
      for (std::size_t k = 0; k < per_node; ++k) assignment[i].push_back(pool[next++]);
    }
  }

  std::vector<Dataset> shards;
  shards.reserve(n);
  for (const auto& rows : assignment) shards.push_back(take_rows(data, rows));
  return shards;
}

}  // namespace gtopt
