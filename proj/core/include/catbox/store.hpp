#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "catbox/optimizer.hpp"

namespace catbox::service {

/// Writes `content` to a temporary sibling, fsyncs it and renames it over
/// `path`, so readers see either the old or the new file.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

std::string read_file(const std::filesystem::path& path);

/// One JSON file per campaign under `root`, named <id>.json.
class CampaignStore {
 public:
  explicit CampaignStore(std::filesystem::path root);

  const std::filesystem::path& root() const noexcept { return root_; }

  /// 128-bit random identifier, 32 lowercase hex digits.
  static std::string new_id();
  static bool valid_id(const std::string& id);

  std::string create(const Campaign& campaign);
  bool exists(const std::string& id) const;
  std::optional<Campaign> load(const std::string& id) const;
  void save(const std::string& id, const Campaign& campaign);
  /// Sorted ids.
  std::vector<std::string> list() const;

  /// Per-campaign lock: exclusive for mutations, shared for reads.
  std::shared_mutex& lock_for(const std::string& id);

 private:
  std::filesystem::path path_for(const std::string& id) const;

  std::filesystem::path root_;
  std::mutex locks_guard_;
  std::map<std::string, std::unique_ptr<std::shared_mutex>> locks_;
};

}  // namespace catbox::service
