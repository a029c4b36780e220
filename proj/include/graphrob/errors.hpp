#pragma once

#include <stdexcept>
#include <string>

namespace graphrob {

// Error categories map onto CLI exit codes: config 2, data 3, numerical 4.
// Precondition violations on library calls throw std::invalid_argument.

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A node with zero out-degree reached Laplacian construction.
class IsolatedNodeError : public DataError {
 public:
  explicit IsolatedNodeError(int node)
      : DataError("node " + std::to_string(node) +
                  " has zero degree; the normalized Laplacian is undefined"),
        node_(node) {}
  int node() const { return node_; }

 private:
  int node_;
};

// Eigenvalue is not simple enough for a derivative to exist.
class MultiplicityError : public NumericalError {
 public:
  MultiplicityError(int index, double gap, double threshold)
      : NumericalError("eigenvalue lambda_" + std::to_string(index) +
                       " is not simple: gap " + std::to_string(gap) +
                       " below threshold " + std::to_string(threshold)),
        index_(index),
        gap_(gap) {}
  int index() const { return index_; }
  double gap() const { return gap_; }

 private:
  int index_;
  double gap_;
};

}  // namespace graphrob
