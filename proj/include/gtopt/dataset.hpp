#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "gtopt/core.hpp"

namespace gtopt {

/// Binary-labelled samples: one row of `features` per sample, labels in {-1,+1}.
struct Dataset {
  Matrix features;
  std::vector<int> labels;

  std::size_t size() const { return labels.size(); }
  std::size_t dim() const { return static_cast<std::size_t>(features.cols()); }
  std::size_t count(int label) const;
};

/// Two isotropic Gaussian classes with means at +-separation/2 along a fixed
/// random unit direction. Class +1 receives the extra sample when N is odd.
Dataset synthetic_two_gaussian(std::size_t samples, std::size_t dim, double separation,
                               std::uint64_t seed);

/// Zero mean and unit standard deviation per column. Columns with zero
/// spread are only centered.
void standardize(Dataset& data);

using LabelMap = std::map<std::string, int>;

/// Parses "3:-1,8:1" into a label map.
LabelMap parse_label_map(const std::string& spec);

/// Reads "label,x_1,...,x_d" rows. An empty label map accepts the raw labels
/// -1 and +1 (or 1). Throws IoError on ragged rows or unmapped labels.
Dataset ingest_dataset(std::istream& in, const LabelMap& label_map, bool normalize);
Dataset ingest_dataset(const std::string& path, const LabelMap& label_map, bool normalize);

void write_dataset_csv(std::ostream& out, const Dataset& data);

enum class PartitionMode { one_class_per_node, iid_shuffle };

PartitionMode parse_partition_mode(const std::string& s);
std::string to_string(PartitionMode mode);

/// Splits a dataset into n node shards of `per_node` samples each.
///
/// one_class_per_node gives floor(n/2) nodes the label -1 and the remaining
/// nodes the label +1, each node holding samples of a single class; the
/// class-to-node assignment is shuffled by `seed`. iid_shuffle deals a
/// shuffled prefix of the data round-robin. With n == 1 the single node
/// holds the whole dataset. Throws PartitionError when a class cannot fill
/// its quota.
std::vector<Dataset> partition_dataset(const Dataset& data, std::size_t n, std::size_t per_node,
                                       PartitionMode mode, std::uint64_t seed);

}  // namespace gtopt
