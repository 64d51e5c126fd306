#include "kp/kg_store.hpp"

#include <fstream>
#include <stdexcept>
#include <utility>

namespace kp {
namespace {

constexpr std::size_t kMaxEntities = 1u << 24;
constexpr std::size_t kMaxRelations = 1u << 16;

std::runtime_error parse_error(const std::filesystem::path& file,
                               std::size_t line, const std::string& what) {
  return std::runtime_error(file.string() + ":" + std::to_string(line) + ": " +
                            what);
}

}  // namespace

const char* split_name(Split s) {
  switch (s) {
    case Split::Train:
      return "train";
    case Split::Valid:
      return "valid";
    case Split::Test:
      return "test";
  }
  throw std::invalid_argument("unknown split");
}

KnowledgeGraph::KnowledgeGraph(std::vector<std::string> entity_names,
                               std::vector<std::string> relation_names,
                               std::vector<Triple> train,
                               std::vector<Triple> valid,
                               std::vector<Triple> test) {
  if (entity_names.size() > kMaxEntities)
    throw std::invalid_argument("entity vocabulary exceeds 2^24");
  if (relation_names.size() > kMaxRelations)
    throw std::invalid_argument("relation vocabulary exceeds 2^16");
  entity_names_ = std::move(entity_names);
  relation_names_ = std::move(relation_names);

  std::unordered_map<std::string, std::size_t> seen;
  for (std::size_t i = 0; i < entity_names_.size(); ++i)
    if (!seen.emplace(entity_names_[i], i).second)
      throw std::invalid_argument("duplicate entity name: " + entity_names_[i]);
  seen.clear();
  for (std::size_t i = 0; i < relation_names_.size(); ++i)
    if (!seen.emplace(relation_names_[i], i).second)
      throw std::invalid_argument("duplicate relation name: " +
                                  relation_names_[i]);

  std::array<std::vector<Triple>, 3> raw = {std::move(train), std::move(valid),
                                            std::move(test)};
  for (Split s : kSplits) {
    const int si = static_cast<int>(s);
    const std::uint8_t bit = std::uint8_t(1) << si;
    splits_[si].reserve(raw[si].size());
    for (const Triple& t : raw[si]) {
      check_ids(t);
      std::uint8_t& mask = known_[pack(t)];
      if (mask & bit) {
        ++duplicates_dropped_;
        continue;
      }
      mask |= bit;
      splits_[si].push_back(t);
    }
  }
}

KnowledgeGraph KnowledgeGraph::load_tsv(const std::filesystem::path& train,
                                        const std::filesystem::path& valid,
                                        const std::filesystem::path& test) {
  std::vector<std::string> entity_names, relation_names;
  std::unordered_map<std::string, EntityId> entity_ids;
  std::unordered_map<std::string, RelationId> relation_ids;
  std::array<std::vector<Triple>, 3> triples;

  auto intern_entity = [&](const std::string& name) {
    auto [it, inserted] =
        entity_ids.emplace(name, static_cast<EntityId>(entity_names.size()));
    if (inserted) {
      if (entity_names.size() >= kMaxEntities)
        throw std::runtime_error("entity vocabulary exceeds 2^24");
      entity_names.push_back(name);
    }
    return it->second;
  };
  auto intern_relation = [&](const std::string& name) {
    auto [it, inserted] = relation_ids.emplace(
        name, static_cast<RelationId>(relation_names.size()));
    if (inserted) {
      if (relation_names.size() >= kMaxRelations)
        throw std::runtime_error("relation vocabulary exceeds 2^16");
      relation_names.push_back(name);
    }
    return it->second;
  };

  const std::array<std::filesystem::path, 3> files = {train, valid, test};
  for (Split s : kSplits) {
    const auto& file = files[static_cast<int>(s)];
    std::ifstream in(file);
    if (!in) throw std::runtime_error("cannot open " + file.string());
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      const auto tab1 = line.find('\t');
      if (tab1 == std::string::npos)
        throw parse_error(file, lineno, "expected 3 tab-separated fields");
      const auto tab2 = line.find('\t', tab1 + 1);
      if (tab2 == std::string::npos ||
          line.find('\t', tab2 + 1) != std::string::npos)
        throw parse_error(file, lineno, "expected 3 tab-separated fields");
      Triple t;
      t.head = intern_entity(line.substr(0, tab1));
      t.relation = intern_relation(line.substr(tab1 + 1, tab2 - tab1 - 1));
      t.tail = intern_entity(line.substr(tab2 + 1));
      triples[static_cast<int>(s)].push_back(t);
    }
  }
  return KnowledgeGraph(std::move(entity_names), std::move(relation_names),
                        std::move(triples[0]), std::move(triples[1]),
                        std::move(triples[2]));
}

void KnowledgeGraph::write_tsv(const std::filesystem::path& train,
                               const std::filesystem::path& valid,
                               const std::filesystem::path& test) const {
  const std::array<std::filesystem::path, 3> files = {train, valid, test};
  for (Split s : kSplits) {
    const auto& file = files[static_cast<int>(s)];
    std::ofstream out(file, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + file.string());
    for (const Triple& t : triples(s))
      out << entity_names_[t.head] << '\t' << relation_names_[t.relation]
          << '\t' << entity_names_[t.tail] << '\n';
    if (!out) throw std::runtime_error("write failed: " + file.string());
  }
}

bool KnowledgeGraph::contains(const Triple& t) const {
  check_ids(t);
  return known_.count(pack(t)) != 0;
}

bool KnowledgeGraph::known(const Triple& t, KnownScope scope) const {
  check_ids(t);
  auto it = known_.find(pack(t));
  if (it == known_.end()) return false;
  if (scope == KnownScope::AllSplits) return true;
  const std::uint8_t valid_bit = std::uint8_t(1)
                                 << static_cast<int>(Split::Valid);
  return (it->second & ~valid_bit) != 0;
}

std::size_t KnowledgeGraph::num_known(KnownScope scope) const {
  if (scope == KnownScope::AllSplits) return known_.size();
  const std::uint8_t valid_bit = std::uint8_t(1)
                                 << static_cast<int>(Split::Valid);
  std::size_t n = 0;
  for (const auto& [key, mask] : known_)
    if ((mask & ~valid_bit) != 0) ++n;
  return n;
}

std::uint64_t KnowledgeGraph::pack(const Triple& t) const {
  return (std::uint64_t(t.head) << 40) | (std::uint64_t(t.relation) << 24) |
         std::uint64_t(t.tail);
}

void KnowledgeGraph::check_ids(const Triple& t) const {
  if (t.head >= entity_names_.size() || t.tail >= entity_names_.size())
    throw std::out_of_range("entity id out of range");
  if (t.relation >= relation_names_.size())
    throw std::out_of_range("relation id out of range");
}

}  // namespace kp
