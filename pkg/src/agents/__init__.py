"""Pipeline agents: planning, experience learning, reflection, recognition and execution."""
