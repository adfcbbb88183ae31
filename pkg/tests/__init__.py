"""
Top-level tests: the CLI wired end to end through CliRunner.
"""
