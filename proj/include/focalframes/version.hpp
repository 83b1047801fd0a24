#ifndef FOCALFRAMES_VERSION_HPP
#define FOCALFRAMES_VERSION_HPP

namespace focalframes {
inline constexpr const char* kVersion = "1.0.0";
}

#endif
