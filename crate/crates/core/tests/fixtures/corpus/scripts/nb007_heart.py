import numpy as np
import pandas as pd
import matplotlib.pyplot as plt
import seaborn as sns

df = pd.read_csv('/kaggle/input/heart.csv')

df['target'].value_counts()
sns.countplot(x='target', data=df)
plt.show()

cat_cols = df.select_dtypes(include='object').columns
for c in cat_cols:
    print(df[c].value_counts().head())

def summarize(frame):
    return frame.describe().T

summary = summarize(df)
print(summary)

sns.pairplot(df.sample(100))
plt.show()

corr = df.corr(numeric_only=True)
print(corr['age'].sort_values())

df.tail()
df.columns
print(len(df))

df.isnull().sum()
print(df.dtypes)
df.nunique()

missing = df.isnull().mean() * 100
missing = missing.sort_values(ascending=False)
print(missing.head(10))

for col in df.columns:
    print(col, df[col].nunique())

print(df['age'].describe())
print(df['age'].skew())
sns.histplot(df['age'], kde=True)
plt.show()

plt.figure(figsize=(8, 4))
sns.boxplot(x='target', y='age', data=df)
plt.xticks(rotation=45)
plt.show()

df = df.dropna(subset=['target'])
df['chest_pain'] = df['chest_pain'].fillna(df['chest_pain'].mode()[0])
df['sex'] = df['sex'].fillna(df['sex'].mode()[0])
df['age'] = df['age'].fillna(df['age'].median())
df['resting_bp'] = df['resting_bp'].fillna(df['resting_bp'].median())
df['cholesterol'] = df['cholesterol'].fillna(df['cholesterol'].median())
df['target'] = df['target'].map({'yes': 1, 'no': 0})

grouped = df.groupby('target').mean(numeric_only=True)
print(grouped)
grouped.plot(kind='bar', figsize=(10, 5))
plt.show()
df.to_csv('heart_clean.csv', index=False)
