# sourcery skip: avoid-global-variables
"""
`get_layouts.py` module. - Retrieves the packaged feature layout catalog.

`get_layouts` is a convenience function for scripts that use sed_detect as a library. The catalog declares, per layout, the raw feature names of every stream; a `FeatureLayout` derives the pooled (mean and variance) coordinates and the layout hash from it.

If you would rather have the catalog as a JSON file, use the [`get-data`](get_data.py) command.

(c) 2025 Stash AI Inc., All rights reserved.
Licensed under the [Plain Apache License](https://plainlicense.org/licenses/permissive/apache-2-0/).
"""

from sed_detect.models import FeatureLayout, LayoutCatalog
from sed_detect.utilities import retrieve_catalog


def get_layouts() -> LayoutCatalog:
    """
    Retrieves the pydantic model of the packaged `layouts.json` catalog.

    Example usage:
    ```python
    from sed_detect import get_layouts

    catalog = get_layouts()
    layout = catalog.layout("openface")
    print(layout.pooled_dim, layout.layout_hash)
    ```
    """
    return retrieve_catalog()


def get_layout(name: str | None = None) -> FeatureLayout:
    """A single layout from the packaged catalog; the catalog default when unnamed."""
    return get_layouts().layout(name)


__all__ = ["get_layout", "get_layouts"]
