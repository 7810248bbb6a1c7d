#pragma once

#include <stdexcept>
#include <string>

namespace rigmaint {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidGraph : public Error {
 public:
  using Error::Error;
};

class VertexOutOfRange : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Raised by null_space_basis when the six rigid-motion columns are
/// rank deficient (all points on a line, or fewer than two distinct points).
class CollinearConfiguration : public Error {
 public:
  using Error::Error;
};

class MissingNeighborPacket : public Error {
 public:
  MissingNeighborPacket(int receiver, int sender)
      : Error("agent " + std::to_string(receiver) + " has no packet from neighbor " +
              std::to_string(sender)),
        receiver_(receiver),
        sender_(sender) {}
  int receiver() const noexcept { return receiver_; }
  int sender() const noexcept { return sender_; }

 private:
  int receiver_;
  int sender_;
};

class StaleSpecialMeasurement : public Error {
 public:
  using Error::Error;
};

class EstimatorNotReady : public Error {
 public:
  using Error::Error;
};

class ScenarioRejected : public Error {
 public:
  using Error::Error;
};

/// Input-file problems. what() carries the line or field path.
class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace rigmaint
