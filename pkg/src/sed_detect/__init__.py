"""
SED Detect.
===================
A command-line tool and library for detecting signs of user engagement decrease (SED) in multimodal human-robot interaction recordings. Behaviour streams (distance, gaze, head pose, facial action units, speech) are pooled into 500 ms frames, windowed over the last `tau` seconds, and classified with logistic regression or from-scratch DNN, GRU and LSTM networks; decisions refer to the user state `eta` seconds earlier.

The package also offers an API function for retrieving the packaged feature layout catalog, `get_layouts()`. You can use it, and the rest of the package, as a library in your own scripts:

```python
from pathlib import Path

import sed_detect as sed
from sed_detect.detect import file_session
from sed_detect.utilities import detect_stream, load_model

layout = sed.get_layout("openface")
model = load_model(Path("models/lstm-tau5-eta2-fold0.json"))
session, samples = file_session(Path("streams/session-1.jsonl"))
for decision in detect_stream(model, layout, samples, interaction_id=session):
    print(decision.t_ms, decision.p_sed)
```
It is designed as a CLI tool, though. The commands are `synth`, `train`, `eval`, `sweep`, `detect`, `kappa`, `contrast`, `stats` and `get-data`; their functions (`run_synth`, `run_train` and so on) take the same parameters.

(c) 2025 Stash AI Inc., All rights reserved.
Licensed under the [Plain Apache License](https://plainlicense.org/licenses/permissive/apache-2-0/).
"""

__version__ = "0.1.0"

import sed_detect.__main__ as main

from sed_detect.get_layouts import get_layout as get_layout
from sed_detect.get_layouts import get_layouts as get_layouts


if __name__ == "__main__":
    # Run the main app
    main.app()


__all__ = ["get_layout", "get_layouts", "main"]


# Metadata
__title__ = "sed_detect"
__description__ = "A streaming detector for signs of user engagement decrease in multimodal human-robot interaction recordings."
__url__ = "https://github.com/knitli/sed-detect"
__author__ = "Stash AI Inc."
__license__ = "Apache-2.0"
__copyright__ = "Copyright (c) 2025 Stash AI Inc."
