"""LangGraph sample workflow and the batch runner."""
