#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

namespace kp {

using EntityId = std::uint32_t;
using RelationId = std::uint32_t;

struct Triple {
  EntityId head = 0;
  RelationId relation = 0;
  EntityId tail = 0;
  friend bool operator==(const Triple&, const Triple&) = default;
};

enum class Split { Train = 0, Valid = 1, Test = 2 };
inline constexpr std::array<Split, 3> kSplits = {Split::Train, Split::Valid,
                                                 Split::Test};
const char* split_name(Split s);

// Which splits count as "known" when rejecting sampled negatives or filtering
// ranking candidates. Default treats every split as known; ExcludeValid drops
// the validation triples from the known set.
enum class KnownScope { AllSplits, ExcludeValid };

// Immutable triple store with interned entity/relation names and O(1)
// membership lookups across splits. Entity ids must fit in 24 bits and
// relation ids in 16 so a triple packs into one 64-bit key.
class KnowledgeGraph {
 public:
  KnowledgeGraph() = default;
  KnowledgeGraph(std::vector<std::string> entity_names,
                 std::vector<std::string> relation_names,
                 std::vector<Triple> train, std::vector<Triple> valid,
                 std::vector<Triple> test);

  // Each file holds one triple per line as head<TAB>relation<TAB>tail.
  // Malformed lines raise std::runtime_error naming the file and line.
  static KnowledgeGraph load_tsv(const std::filesystem::path& train,
                                 const std::filesystem::path& valid,
                                 const std::filesystem::path& test);
  void write_tsv(const std::filesystem::path& train,
                 const std::filesystem::path& valid,
                 const std::filesystem::path& test) const;

  std::size_t num_entities() const { return entity_names_.size(); }
  std::size_t num_relations() const { return relation_names_.size(); }
  // Distinct triples across all splits.
  std::size_t num_triples() const { return known_.size(); }
  const std::vector<std::string>& entity_names() const { return entity_names_; }
  const std::vector<std::string>& relation_names() const {
    return relation_names_;
  }
  const std::vector<Triple>& triples(Split s) const {
    return splits_[static_cast<int>(s)];
  }

  // Membership in the union of all splits. Out-of-range ids throw
  // std::out_of_range rather than returning false.
  bool contains(const Triple& t) const;
  bool known(const Triple& t, KnownScope scope) const;
  // Distinct triples the scope treats as known.
  std::size_t num_known(KnownScope scope) const;

  // Duplicate lines dropped while constructing the per-split lists.
  std::size_t duplicates_dropped() const { return duplicates_dropped_; }

  std::uint64_t pack(const Triple& t) const;

 private:
  void check_ids(const Triple& t) const;

  std::vector<std::string> entity_names_;
  std::vector<std::string> relation_names_;
  std::array<std::vector<Triple>, 3> splits_;
  // Packed triple -> bitmask of splits it appears in.
  std::unordered_map<std::uint64_t, std::uint8_t> known_;
  std::size_t duplicates_dropped_ = 0;
};

}  // namespace kp
