#ifndef OFFLOAD_VERSION_HPP
#define OFFLOAD_VERSION_HPP

namespace offload {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace offload

#endif  // OFFLOAD_VERSION_HPP
