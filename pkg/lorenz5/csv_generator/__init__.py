from .generate import flatten_json, render_table, write_table
