#include "metaphor/errors.hpp"

#include <cerrno>
#include <cstring>

namespace metaphor {

void throw_io(const std::string& what, const std::string& path) {
  const int err = errno;
  std::string msg = what + " '" + path + "'";
  if (err != 0) msg += ": " + std::string(std::strerror(err));
  throw IoError(msg);
}

}  // namespace metaphor
