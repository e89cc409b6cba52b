#pragma once

#include <stdexcept>
#include <string>

namespace brasp {

// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed inputs: out-of-range plaintexts, points outside the grid, bad keys.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Cryptographic failures: invalid group elements or ciphertexts, failed
// authentication, prime generation exhausted.
class CryptoError : public Error {
 public:
  using Error::Error;
};

// Violations of the two-server protocol: wrong action order, epoch desync,
// unmatched update addresses, slot overflow that needs a redistribution.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

// Persistence and ingestion failures, including version mismatch and checksum
// corruption.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace brasp
