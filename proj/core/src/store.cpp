#include "catbox/store.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <random>
#include <sstream>

#include "catbox/errors.hpp"

namespace catbox::service {

namespace fs = std::filesystem;

namespace {

[[noreturn]] void throw_errno(const std::string& what, const fs::path& p) {
  throw Error(what + " " + p.string() + ": " + std::strerror(errno));
}

void fsync_dir(const fs::path& dir) {
  int fd = ::open(dir.empty() ? "." : dir.c_str(), O_RDONLY | O_DIRECTORY);
  if (fd < 0) return;  // best effort on filesystems without directory handles
  ::fsync(fd);
  ::close(fd);
}

std::string temp_suffix() {
  static thread_local std::mt19937_64 gen{std::random_device{}()};
  std::ostringstream os;
  os << std::hex << gen();
  return os.str();
}

}  // namespace

void write_file_atomic(const fs::path& path, const std::string& content) {
  fs::path tmp = path;
  tmp += ".tmp." + temp_suffix();
  int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
  if (fd < 0) throw_errno("cannot create", tmp);
  const char* data = content.data();
  std::size_t left = content.size();
  while (left > 0) {
    ssize_t n = ::write(fd, data, left);
    if (n < 0) {
      if (errno == EINTR) continue;
      int saved = errno;
      ::close(fd);
      ::unlink(tmp.c_str());
      errno = saved;
      throw_errno("cannot write", tmp);
    }
    data += n;
    left -= static_cast<std::size_t>(n);
  }
  if (::fsync(fd) != 0) {
    int saved = errno;
    ::close(fd);
    ::unlink(tmp.c_str());
    errno = saved;
    throw_errno("cannot fsync", tmp);
  }
  ::close(fd);
  if (::rename(tmp.c_str(), path.c_str()) != 0) {
    int saved = errno;
    ::unlink(tmp.c_str());
    errno = saved;
    throw_errno("cannot rename onto", path);
  }
  fsync_dir(path.parent_path());
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

CampaignStore::CampaignStore(fs::path root) : root_(std::move(root)) {
  fs::create_directories(root_);
}

std::string CampaignStore::new_id() {
  static thread_local std::random_device rd;
  static const char* hex = "0123456789abcdef";
  std::string id;
  id.reserve(32);
  for (int word = 0; word < 4; ++word) {
    std::uint32_t v = rd();
    for (int k = 0; k < 8; ++k) {
      id.push_back(hex[(v >> (28 - 4 * k)) & 0xF]);
    }
  }
  return id;
}

bool CampaignStore::valid_id(const std::string& id) {
  return id.size() == 32 && std::all_of(id.begin(), id.end(), [](char c) {
           return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f');
         });
}

fs::path CampaignStore::path_for(const std::string& id) const { return root_ / (id + ".json"); }

std::string CampaignStore::create(const Campaign& campaign) {
  std::string id;
  do {
    id = new_id();
  } while (exists(id));
  save(id, campaign);
  return id;
}

bool CampaignStore::exists(const std::string& id) const {
  return valid_id(id) && fs::is_regular_file(path_for(id));
}

std::optional<Campaign> CampaignStore::load(const std::string& id) const {
  if (!exists(id)) return std::nullopt;
  auto j = nlohmann::json::parse(read_file(path_for(id)));
  return Campaign::from_json(j);
}

void CampaignStore::save(const std::string& id, const Campaign& campaign) {
  if (!valid_id(id)) throw Error("invalid campaign id '" + id + "'");
  write_file_atomic(path_for(id), campaign.to_json().dump(2) + "\n");
}

std::vector<std::string> CampaignStore::list() const {
  std::vector<std::string> ids;
  for (const auto& entry : fs::directory_iterator(root_)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".json") continue;
    std::string stem = entry.path().stem().string();
    if (valid_id(stem)) ids.push_back(stem);
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

std::shared_mutex& CampaignStore::lock_for(const std::string& id) {
  std::lock_guard<std::mutex> guard(locks_guard_);
  auto& slot = locks_[id];
  if (!slot) slot = std::make_unique<std::shared_mutex>();
  return *slot;
}

}  // namespace catbox::service
