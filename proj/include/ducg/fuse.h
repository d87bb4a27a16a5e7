#ifndef DUCG_FUSE_H_
#define DUCG_FUSE_H_

#include <vector>

#include "ducg/model.h"

namespace ducg {

// Merges single-disease modules into one chief-complaint model. Variables
// with the same id become one node carrying the union of incoming links.
// Shared declarations must agree exactly across modules; any disagreement
// throws ConflictError. The output lists every
// collection sorted by id, so module order does not affect the result.
ChiefComplaintModel fuse(const std::vector<SingleDiseaseModule>& modules,
                         const ModelHeader& header = {});

}  // namespace ducg

#endif  // DUCG_FUSE_H_
