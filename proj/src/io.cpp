#include "slu/io.hpp"

#include <fstream>
#include <system_error>
#include <unistd.h>

#include "slu/error.hpp"

namespace slu {

void atomic_write(const std::filesystem::path& path, const std::function<void(std::ostream&)>& writer) {
  auto tmp = path;
  tmp += ".tmp" + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write " + tmp.string());
    writer(out);
    out.flush();
    if (!out) throw InputError("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw InputError("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
  }
}

void atomic_write(const std::filesystem::path& path, const std::string& contents) {
  atomic_write(path, [&contents](std::ostream& out) { out << contents; });
}

}  // namespace slu
