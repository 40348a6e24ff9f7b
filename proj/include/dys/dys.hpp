#ifndef DYS_DYS_HPP
#define DYS_DYS_HPP

#include "dys/data/csv.hpp"
#include "dys/data/dataset.hpp"
#include "dys/data/preprocess.hpp"
#include "dys/error.hpp"
#include "dys/interpret.hpp"
#include "dys/metrics.hpp"
#include "dys/model/evaluate.hpp"
#include "dys/model/loss.hpp"
#include "dys/model/model.hpp"
#include "dys/model/serialize.hpp"
#include "dys/model/train.hpp"
#include "dys/numeric/adam.hpp"
#include "dys/numeric/gradcheck.hpp"
#include "dys/numeric/mlp.hpp"
#include "dys/numeric/smooth_step.hpp"
#include "dys/random.hpp"
#include "dys/selection.hpp"
#include "dys/synth.hpp"

#endif // DYS_DYS_HPP
