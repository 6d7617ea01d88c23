#ifndef RDTRUNC_VERSION_HPP
#define RDTRUNC_VERSION_HPP

namespace rdtrunc {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace rdtrunc

#endif  // RDTRUNC_VERSION_HPP
