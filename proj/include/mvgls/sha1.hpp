#pragma once

#include <string>
#include <string_view>

namespace mvgls {

std::string sha1_hex(std::string_view bytes);

/// Hash of "blob <size>\0<content>", matching git's object id for a file.
std::string git_blob_hash(std::string_view content);

}  // namespace mvgls
